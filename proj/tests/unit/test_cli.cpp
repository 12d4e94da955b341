#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <tuple>
#include <sstream>

#include <json.hpp>

#include "cxr/cli/cli.hpp"
#include "cxr/training/config.hpp"
#include "support/temp_dir.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cxr_run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cxr::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

const std::vector<std::string> kSmall = {"--set", "image_size=16",     "--set", "encoder_width=16",
                                         "--set", "decoder_width=16",  "--set", "encoder_layers=1",
                                         "--set", "decoder_layers=1",  "--set", "val_samples=4",
                                         "--set", "test_samples=4",    "--set", "base_epochs=1",
                                         "--set", "max_context_tokens=16"};

std::vector<std::string> train_args(const fs::path& data, const fs::path& out, std::vector<std::string> extra = {}) {
  std::vector<std::string> a{"train", "--data", data.string(), "--out", out.string()};
  a.insert(a.end(), kSmall.begin(), kSmall.end());
  a.insert(a.end(), extra.begin(), extra.end());
  return a;
}

}  // namespace

TEST_CASE("help lists every config key") {
  const auto r = cxr_run({"--help"});
  CHECK(r.code == 0);
  for (const auto& k : cxr::training::config_keys()) CHECK(r.out.find("  " + k.name + " ") != std::string::npos);
  const auto t = cxr_run({"train", "--help"});
  CHECK(t.code == 0);
  CHECK(t.out.find("--no-curriculum") != std::string::npos);
  CHECK(t.out.find("learning_rate") != std::string::npos);
}

TEST_CASE("usage errors exit 1 with one line") {
  cxr::testing::TempDir tmp;
  for (const auto& args : std::vector<std::vector<std::string>>{
           {},
           {"gen-data", "--n", "0", "--out", (tmp.path() / "d").string()},
           {"gen-data", "--out", (tmp.path() / "d").string()},
           {"gen-data", "--n", "5", "--out", (tmp.path() / "d").string(), "--profile", "weird"},
           {"train", "--data", "x"},
           {"analyze", "--out", "x"}}) {
    const auto r = cxr_run(args);
    CHECK(r.code != 0);
    CHECK(r.err.rfind("cxr: error kind=", 0) == 0);
    CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
  }
  CHECK(cxr_run({"gen-data", "--n", "0", "--out", (tmp.path() / "d").string()}).code == 1);
}

TEST_CASE("train resolves flags, presets and overrides") {
  cxr::testing::TempDir tmp;
  const auto data = tmp.path() / "data";
  const auto g = cxr_run({"gen-data", "--n", "60", "--seed", "4", "--out", data.string(), "--image-size", "16"});
  REQUIRE(g.code == 0);
  CHECK(fs::exists(data / "manifest.jsonl"));

  SUBCASE("defaults are multi-view, context and curriculum without the head") {
    auto args = train_args(data, tmp.path() / "run", {"--set", "bins=2", "--set", "fraction=0.5"});
    const auto r = cxr_run(args);
    INFO(r.err);
    REQUIRE(r.code == 0);
    const auto cfg = read_json(tmp.path() / "run" / "config.json");
    CHECK(cfg["num_views"] == 2);
    CHECK(cfg["use_context"] == true);
    CHECK(cfg["curriculum"] == true);
    CHECK(cfg["classifier"] == false);
    CHECK(cfg["encoder_width"] == 16);
    // The echoed text config reproduces the run config.
    std::ifstream in(tmp.path() / "run" / "config.txt");
    std::stringstream text;
    text << in.rdbuf();
    CHECK(cxr::training::to_json(cxr::training::parse_run_config(text.str())) == cfg);
  }

  SUBCASE("baseline flags") {
    const auto r = cxr_run(train_args(data, tmp.path() / "sv", {"--single-view", "--no-context", "--no-curriculum"}));
    REQUIRE(r.code == 0);
    const auto cfg = read_json(tmp.path() / "sv" / "config.json");
    CHECK(cfg["num_views"] == 1);
    CHECK(cfg["use_context"] == false);
    CHECK(cfg["curriculum"] == false);
  }

  SUBCASE("config file plus classifier flag") {
    std::ofstream(tmp.path() / "c.cfg") << "preset = toy\nlearning_rate = 0.001\ncurriculum = false\n";
    auto args = train_args(data, tmp.path() / "cls", {"--cls"});
    args.insert(args.begin() + 1, {"--config", (tmp.path() / "c.cfg").string()});
    const auto r = cxr_run(args);
    REQUIRE(r.code == 0);
    const auto cfg = read_json(tmp.path() / "cls" / "config.json");
    CHECK(cfg["classifier"] == true);
    CHECK(cfg["learning_rate"] == 0.001);
  }

  SUBCASE("error categories") {
    CHECK(cxr_run(train_args(data, tmp.path() / "x", {"--set", "nope=1"})).code == 1);
    CHECK(cxr_run(train_args(data, tmp.path() / "x", {"--cls", "--no-cls"})).code == 1);
    CHECK(cxr_run(train_args(tmp.path() / "missing", tmp.path() / "x")).code == 2);
    // Images are 16 px; a 32 px model cannot consume them.
    CHECK(cxr_run(train_args(data, tmp.path() / "x", {"--set", "image_size=32"})).code == 2);
    const auto r = cxr_run(train_args(data, tmp.path() / "x", {"--no-curriculum", "--set", "learning_rate=1e300",
                                                               "--set", "base_epochs=3"}));
    CHECK(r.code == 3);
    CHECK(r.err.find("kind=numeric") != std::string::npos);
  }

  SUBCASE("generate, eval and analyze") {
    REQUIRE(cxr_run(train_args(data, tmp.path() / "run", {"--no-curriculum"})).code == 0);
    const auto gen = tmp.path() / "gen";
    REQUIRE(cxr_run({"generate", "--checkpoint", (tmp.path() / "run" / "best.ckpt").string(), "--data",
                     data.string(), "--split", "test", "--out", gen.string(), "--max-samples", "3"})
                .code == 0);
    const auto ev = tmp.path() / "eval";
    REQUIRE(cxr_run({"eval", "--predictions", (gen / "predictions.jsonl").string(), "--references",
                     (gen / "references.jsonl").string(), "--out", ev.string()})
                .code == 0);
    const auto report = read_json(ev / "eval_report.json");
    CHECK(report["num_samples"] == 3);
    CHECK(report.contains("AVG_NLG"));
    CHECK(cxr_run({"generate", "--checkpoint", (tmp.path() / "run" / "best.ckpt").string(), "--data",
                   data.string(), "--split", "dev", "--out", gen.string()})
              .code == 1);
    CHECK(cxr_run({"eval", "--predictions", (ev / "missing.jsonl").string(), "--references",
                   (gen / "references.jsonl").string(), "--out", ev.string()})
              .code == 2);

    const auto an = tmp.path() / "an";
    const auto r = cxr_run({"analyze", "--run-a", (tmp.path() / "run").string(), "--run-a", ev.string(), "--run-b",
                            ev.string(), "--run-b", (tmp.path() / "run").string(), "--out", an.string()});
    INFO(r.err);
    REQUIRE(r.code == 0);
    for (const char* f : {"a1_length_metrics.csv", "a2_length_hist.csv", "b1_length_metrics.csv", "ab_rouge_l.csv",
                          "ab_meteor.csv", "ab_f1_micro.csv", "analysis.json"}) {
      CHECK(fs::exists(an / f));
    }
  }
}

TEST_CASE("ablation grid covers the ten variants") {
  const auto& v = cxr::cli::ablation_variants();
  CHECK(v.size() == 10);
  std::set<std::tuple<std::size_t, bool, bool, bool>> seen;
  for (const auto& x : v) seen.insert({x.num_views, x.use_context, x.curriculum, x.classifier});
  CHECK(seen.size() == 10);
  CHECK(v[2].flags.empty());  // the default configuration
}
