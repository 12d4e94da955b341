#include "cxr/cli/cli.hpp"

#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cxr/analysis/analysis.hpp"
#include "cxr/corpus/manifest.hpp"
#include "cxr/corpus/synthetic.hpp"
#include "cxr/error.hpp"
#include "cxr/log.hpp"
#include "cxr/training/config.hpp"
#include "cxr/training/inference.hpp"
#include "cxr/training/trainer.hpp"

namespace cxr::cli {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<Variant>& ablation_variants() {
  static const std::vector<Variant> v = {
      {"GIT-CXR-CLS (MV+C+CL)", {"--cls"}, 2, true, true, true},
      {"GIT-CXR-CLS (SV+C+CL)", {"--cls", "--single-view"}, 1, true, true, true},
      {"GIT-CXR (MV+C+CL)", {}, 2, true, true, false},
      {"GIT-CXR (SV+C+CL)", {"--single-view"}, 1, true, true, false},
      {"GIT-CXR-CLS (MV+C)", {"--cls", "--no-curriculum"}, 2, true, false, true},
      {"GIT-CXR-CLS (SV+C)", {"--cls", "--single-view", "--no-curriculum"}, 1, true, false, true},
      {"GIT-CXR (MV+C)", {"--no-curriculum"}, 2, true, false, false},
      {"GIT-CXR (SV+C)", {"--single-view", "--no-curriculum"}, 1, true, false, false},
      {"GIT-CXR (MV)", {"--no-context", "--no-curriculum"}, 2, false, false, false},
      {"GIT-CXR (SV)", {"--single-view", "--no-context", "--no-curriculum"}, 1, false, false, false},
  };
  return v;
}

namespace {

std::string kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::Usage:
      return "usage";
    case ErrorKind::Data:
      return "data";
    case ErrorKind::Numeric:
      return "numeric";
  }
  return "usage";
}

int fail(std::ostream& err, ErrorKind kind, const std::string& message) {
  std::string flat = message;
  for (char& c : flat) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  err << "cxr: error kind=" << kind_name(kind) << " message=" << json(flat).dump() << '\n';
  return static_cast<int>(kind);
}

fs::path manifest_path(const fs::path& data) {
  if (fs::is_directory(data)) return data / "manifest.jsonl";
  return data;
}

std::vector<corpus::Study> load_corpus(const fs::path& data) {
  const fs::path path = manifest_path(data);
  if (!fs::exists(path)) throw DataError("manifest not found: " + path.string());
  auto loaded = corpus::load_manifest(path);
  if (loaded.dropped > 0) log::warn(std::to_string(loaded.dropped) + " studies without a report were dropped");
  return std::move(loaded.studies);
}

fs::path samples_path(const fs::path& p) {
  if (fs::is_regular_file(p)) return p;
  if (fs::exists(p / "samples.jsonl")) return p / "samples.jsonl";
  if (fs::exists(p / "test" / "samples.jsonl")) return p / "test" / "samples.jsonl";
  throw DataError("no samples.jsonl under " + p.string());
}

std::string config_key_list() {
  std::ostringstream os;
  os << "Config keys (key = value lines or a JSON object; --set key=value):\n";
  for (const auto& k : training::config_keys()) {
    os << "  " << k.name;
    for (std::size_t pad = k.name.size(); pad < 20; ++pad) os << ' ';
    os << k.help << '\n';
  }
  return os.str();
}

struct GenDataArgs {
  long long n = -1;
  std::uint64_t seed = 1;
  std::string out;
  std::string profile = "standard";
  std::size_t image_size = 32;
};

struct TrainArgs {
  std::string config = "toy";
  std::string data;
  std::string out;
  std::vector<std::string> sets;
  bool no_curriculum = false;
  bool no_cls = false;
  bool cls = false;
  bool single_view = false;
  bool no_context = false;
};

struct GenerateArgs {
  std::string checkpoint;
  std::string data;
  std::string split = "test";
  std::string out;
  std::size_t beam = 0;
  std::size_t max_samples = 0;
};

struct EvalArgs {
  std::string predictions;
  std::string references;
  std::string out;
};

struct AnalyzeArgs {
  std::vector<std::string> run_a;
  std::vector<std::string> run_b;
  std::string out;
  std::size_t bucket_width = 25;
};

int cmd_gen_data(const GenDataArgs& a, std::ostream& out) {
  if (a.n <= 0) throw UsageError("--n must be a positive number of studies");
  const auto studies = corpus::generate_synthetic_corpus(static_cast<std::size_t>(a.n), a.seed, a.profile, a.image_size);
  const fs::path path = fs::path(a.out) / "manifest.jsonl";
  fs::create_directories(a.out);
  corpus::save_manifest(studies, path);
  std::size_t counts[3] = {0, 0, 0};
  for (const auto& s : studies) ++counts[static_cast<std::size_t>(s.split)];
  out << json{{"manifest", path.string()},
              {"studies", studies.size()},
              {"train", counts[static_cast<std::size_t>(corpus::Split::Train)]},
              {"validation", counts[static_cast<std::size_t>(corpus::Split::Validation)]},
              {"test", counts[static_cast<std::size_t>(corpus::Split::Test)]}}
             .dump()
      << '\n';
  return 0;
}

training::RunConfig resolve_train_config(const TrainArgs& a) {
  if (a.cls && a.no_cls) throw UsageError("--cls and --no-cls are mutually exclusive");
  training::RunConfig c = training::load_run_config(a.config);
  for (const auto& kv : a.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
    training::set_config_value(c, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (a.no_curriculum) c.curriculum = false;
  if (a.no_cls) c.classifier = false;
  if (a.cls) c.classifier = true;
  if (a.single_view) c.num_views = 1;
  if (a.no_context) c.use_context = false;
  c.validate();
  return c;
}

int cmd_train(const TrainArgs& a, std::ostream& out) {
  const training::RunConfig config = resolve_train_config(a);
  const auto studies = load_corpus(a.data);
  const auto state = training::train(config, studies, a.out);
  json summary = training::to_json(state);
  summary.erase("validations");
  out << summary.dump() << '\n';
  return 0;
}

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  const auto split = corpus::parse_split(a.split);
  if (!split) throw UsageError("unknown split '" + a.split + "'");
  auto run = training::load_run_checkpoint(a.checkpoint);
  const auto studies = load_corpus(a.data);
  auto samples = training::samples_for(run.config, studies, *split, run.vocab);
  if (a.max_samples > 0 && samples.size() > a.max_samples) samples.resize(a.max_samples);
  if (samples.empty()) throw DataError("split '" + a.split + "' has no usable samples");
  model::GenerateOptions options;
  options.max_text_len = run.config.max_text_len;
  options.beam_size = a.beam > 0 ? a.beam : run.config.beam_size;
  const auto preds = training::predict(run.model, run.vocab, samples, options);
  training::write_predictions(fs::path(a.out) / "predictions.jsonl", preds);
  training::write_references(fs::path(a.out) / "references.jsonl", preds);
  out << json{{"predictions", (fs::path(a.out) / "predictions.jsonl").string()}, {"samples", preds.size()}}.dump()
      << '\n';
  return 0;
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const auto preds = training::read_prediction_pair(a.predictions, a.references);
  const auto report = training::evaluate_predictions(preds);
  training::write_eval_outputs(a.out, preds, report);
  json summary = metrics::to_json(report);
  summary.erase("per_label");
  out << summary.dump() << '\n';
  return 0;
}

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out) {
  if (a.bucket_width == 0) throw UsageError("--bucket-width must be positive");
  const fs::path dir(a.out);
  fs::create_directories(dir);
  json summary = json::object();
  auto side = [&](const std::vector<std::string>& runs, const std::string& tag) {
    std::vector<analysis::LengthBucketSeries> series;
    json quartiles = json::array();
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const auto samples = analysis::load_samples(samples_path(runs[i]));
      if (samples.empty()) throw DataError("no samples in run " + runs[i]);
      series.push_back(analysis::metrics_by_length(samples, a.bucket_width));
      std::vector<std::size_t> gen, tgt;
      for (const auto& s : samples) {
        gen.push_back(s.generated_length);
        tgt.push_back(s.target_length);
      }
      const auto hist = analysis::length_histograms(gen, tgt);
      const std::string stem = tag + std::to_string(i + 1);
      training::write_text_file(dir / (stem + "_length_metrics.csv"), analysis::bucket_csv(series.back()));
      training::write_text_file(dir / (stem + "_length_hist.csv"), analysis::histogram_csv(hist));
      quartiles.push_back({{"run", runs[i]},
                           {"samples", samples.size()},
                           {"truncated_generated", hist.truncated_generated},
                           {"longest_quartile_rouge_l", *analysis::longest_quartile_mean(samples, analysis::Metric::RougeL)},
                           {"longest_quartile_meteor", *analysis::longest_quartile_mean(samples, analysis::Metric::Meteor)}});
    }
    summary[tag] = quartiles;
    return series;
  };
  const auto a_series = side(a.run_a, "a");
  if (!a.run_b.empty()) {
    const auto b_series = side(a.run_b, "b");
    json comparisons = json::object();
    for (auto m : {analysis::Metric::Meteor, analysis::Metric::RougeL, analysis::Metric::F1Micro}) {
      const auto report = analysis::ab_compare(a_series, b_series, m);
      training::write_text_file(dir / ("ab_" + analysis::metric_name(m) + ".csv"), analysis::ab_csv(report));
      comparisons[analysis::metric_name(m)] = analysis::to_json(report);
    }
    summary["comparisons"] = comparisons;
  }
  training::write_text_file(dir / "analysis.json", summary.dump(2) + "\n");
  out << json{{"out", dir.string()}, {"runs_a", a.run_a.size()}, {"runs_b", a.run_b.size()}}.dump() << '\n';
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Chest X-ray report generation toolkit: synthetic data, training, decoding, evaluation, analysis.",
               "cxr"};
  app.require_subcommand(1);
  app.footer(config_key_list() + "\nExit codes: 0 ok, 1 usage, 2 data, 3 numeric. Log level: CXR_LOG=error|warn|info|debug.");

  GenDataArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "write a synthetic corpus (manifest.jsonl + PGM images)");
  gen_cmd->add_option("--n", gen.n, "number of studies")->required();
  gen_cmd->add_option("--seed", gen.seed, "generator seed");
  gen_cmd->add_option("--out", gen.out, "output directory")->required();
  gen_cmd->add_option("--profile", gen.profile, "noise profile: clean, standard, noisy");
  gen_cmd->add_option("--image-size", gen.image_size, "image edge in pixels");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "train a model; defaults to multi-view + context + curriculum");
  train_cmd->add_option("--config", tr.config, "preset name (toy, full) or config file");
  train_cmd->add_option("--data", tr.data, "manifest.jsonl or its directory")->required();
  train_cmd->add_option("--out", tr.out, "run directory")->required();
  train_cmd->add_option("--set", tr.sets, "override one config key, key=value (repeatable)");
  train_cmd->add_flag("--no-curriculum", tr.no_curriculum, "train on full epochs without the length curriculum");
  train_cmd->add_flag("--no-cls", tr.no_cls, "disable the classification head");
  train_cmd->add_flag("--cls", tr.cls, "enable the classification head");
  train_cmd->add_flag("--single-view", tr.single_view, "one frontal view per sample");
  train_cmd->add_flag("--no-context", tr.no_context, "drop the indication/history prompt");
  train_cmd->footer(config_key_list());

  GenerateArgs ge;
  auto* gen_text = app.add_subcommand("generate", "decode reports for one split with a checkpoint");
  gen_text->add_option("--checkpoint", ge.checkpoint, "checkpoint written by train")->required();
  gen_text->add_option("--data", ge.data, "manifest.jsonl or its directory")->required();
  gen_text->add_option("--split", ge.split, "train, validation or test");
  gen_text->add_option("--out", ge.out, "output directory")->required();
  gen_text->add_option("--beam", ge.beam, "beam width (default: from the run config)");
  gen_text->add_option("--max-samples", ge.max_samples, "decode at most this many samples (0 = all)");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "score predictions against references");
  eval_cmd->add_option("--predictions", ev.predictions, "predictions.jsonl")->required();
  eval_cmd->add_option("--references", ev.references, "references.jsonl")->required();
  eval_cmd->add_option("--out", ev.out, "output directory")->required();

  AnalyzeArgs an;
  auto* an_cmd = app.add_subcommand("analyze", "length curves, histograms and A/B comparison");
  an_cmd->add_option("--run-a", an.run_a, "run dir, eval dir or samples.jsonl (repeat per seed)")->required();
  an_cmd->add_option("--run-b", an.run_b, "second arm, same forms (repeat per seed)");
  an_cmd->add_option("--out", an.out, "output directory")->required();
  an_cmd->add_option("--bucket-width", an.bucket_width, "target-length bucket width in tokens");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    return fail(err, ErrorKind::Usage, e.what());
  }

  try {
    if (gen_cmd->parsed()) return cmd_gen_data(gen, out);
    if (train_cmd->parsed()) return cmd_train(tr, out);
    if (gen_text->parsed()) return cmd_generate(ge, out);
    if (eval_cmd->parsed()) return cmd_eval(ev, out);
    if (an_cmd->parsed()) return cmd_analyze(an, out);
  } catch (const Error& e) {
    return fail(err, e.kind(), e.what());
  } catch (const fs::filesystem_error& e) {
    return fail(err, ErrorKind::Data, e.what());
  } catch (const json::exception& e) {
    return fail(err, ErrorKind::Data, e.what());
  }
  return fail(err, ErrorKind::Usage, "no command given");
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace cxr::cli
