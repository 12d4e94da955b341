// Acceptance suite. Prints one line per criterion:
//   criterion <n> PASS|FAIL <seconds>s: <detail>
// Usage: acceptance [--only N]... [--artifacts DIR]
// Exit status is 0 only when every selected criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cxr/analysis/analysis.hpp"
#include "cxr/corpus/grammar.hpp"
#include "cxr/corpus/synthetic.hpp"
#include "cxr/curriculum/curriculum.hpp"
#include "cxr/metrics/clinical.hpp"
#include "cxr/metrics/nlg.hpp"
#include "cxr/model/model.hpp"
#include "cxr/numkit/random.hpp"
#include "cxr/training/losses.hpp"
#include "support/finite_diff.hpp"
#include "support/metric_oracles.hpp"
#include "support/published_fixtures.hpp"
#include "support/sampling_oracles.hpp"

namespace fs = std::filesystem;
namespace nk = cxr::numkit;
using nlohmann::json;
using nk::Tensor;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects sub-checks; a criterion passes when all of them do.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) {
      pass_ = false;
      if (!failures_.empty()) failures_ += "; ";
      failures_ += what;
    }
  }
  void note(const std::string& s) {
    if (!notes_.empty()) notes_ += ", ";
    notes_ += s;
  }
  Outcome outcome() const { return {pass_, pass_ ? notes_ : "failed: " + failures_ + " | " + notes_}; }

 private:
  bool pass_ = true;
  std::string failures_;
  std::string notes_;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

fs::path g_artifacts;

fs::path artifact_dir(const std::string& name) {
  const fs::path dir = g_artifacts / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Runs the command-line tool; returns its exit status.
int run_tool(const std::vector<std::string>& args, const fs::path& log) {
  std::string cmd = "'" + std::string(CXR_TOOL_PATH) + "'";
  for (const auto& a : args) cmd += " '" + a + "'";
  cmd += " > '" + log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  if (status == -1) return -1;
  return WEXITSTATUS(status);
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

Tensor random_tensor(nk::Rng& rng, nk::Shape shape, bool grad = true) {
  std::vector<double> v(nk::element_count(shape));
  for (auto& x : v) x = rng.normal();
  return Tensor::from(std::move(shape), std::move(v), grad);
}

Tensor project(const Tensor& x, const Tensor& w) { return nk::sum(nk::mul(x, w)); }

// ---------------------------------------------------------------------------

Outcome criterion_1() {
  using namespace nk;
  Checks c;
  Rng rng(1001);
  const auto t0 = std::chrono::steady_clock::now();
  std::map<std::string, double> worst;
  auto record = [&](const std::string& op, const cxr::testing::GradCheck& g) {
    worst[op] = std::max(worst[op], g.max_rel_error);
  };
  using cxr::testing::check_gradients;
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t m = 2 + rng.below(4), n = 2 + rng.below(4), k = 2 + rng.below(4);
    auto a = random_tensor(rng, {m, n}), b = random_tensor(rng, {m, n}), w = random_tensor(rng, {m, n}, false);
    auto row = random_tensor(rng, {n});
    record("add", check_gradients({a, b}, [&] { return project(add(a, b), w); }));
    record("sub", check_gradients({a, row}, [&] { return project(sub(a, row), w); }));
    record("mul", check_gradients({a, row}, [&] { return project(mul(row, a), w); }));
    record("scale", check_gradients({a}, [&] { return project(scale(a, -1.3), w); }));
    record("gelu", check_gradients({a}, [&] { return project(gelu(scale(a, 2.0)), w); }));
    record("softmax", check_gradients({a}, [&] { return project(softmax(a, static_cast<int>(trial % 2)), w); }));
    auto gain = random_tensor(rng, {n}), bias = random_tensor(rng, {n});
    record("layer_norm", check_gradients({a, gain, bias}, [&] { return project(layer_norm(a, gain, bias), w); }));
    record("sum", check_gradients({a}, [&] { return sum(mul(a, a)); }));
    record("mean", check_gradients({a}, [&] { return mean(mul(a, a)); }));
    record("reshape", check_gradients({a}, [&] { return project(reshape(a, {m * n}), reshape(w, {m * n})); }));
    auto bk = random_tensor(rng, {n, k}), wk = random_tensor(rng, {m, k}, false);
    record("matmul", check_gradients({a, bk}, [&] { return project(matmul(a, bk), wk); }));
    auto wt = random_tensor(rng, {n, m}, false);
    record("transpose", check_gradients({a}, [&] { return project(transpose(a), wt); }));
    auto a2 = random_tensor(rng, {k, n});
    auto wr = random_tensor(rng, {m + k, n}, false);
    record("concat_rows", check_gradients({a, a2}, [&] {
             return project(concat_rows(std::vector<Tensor>{a, a2}), wr);
           }));
    auto a3 = random_tensor(rng, {m, k});
    auto wc = random_tensor(rng, {m, n + k}, false);
    record("concat_cols", check_gradients({a, a3}, [&] {
             return project(concat_cols(std::vector<Tensor>{a, a3}), wc);
           }));
    auto wsr = random_tensor(rng, {m - 1, n}, false), wsc = random_tensor(rng, {m, n - 1}, false);
    record("slice_rows", check_gradients({a}, [&] { return project(slice_rows(a, 1, m - 1), wsr); }));
    record("slice_cols", check_gradients({a}, [&] { return project(slice_cols(a, 1, n - 1), wsc); }));
    auto wm = random_tensor(rng, {n}, false);
    record("mean_rows", check_gradients({a}, [&] { return project(mean_rows(a), wm); }));
    std::vector<std::int64_t> ids{0, static_cast<std::int64_t>(m - 1), 1, 0};
    auto we = random_tensor(rng, {4, n}, false);
    record("embedding_lookup", check_gradients({a}, [&] { return project(embedding_lookup(a, ids), we); }));
    std::vector<std::int64_t> targets(m);
    for (auto& t : targets) t = static_cast<std::int64_t>(rng.below(n));
    targets[0] = kIgnoreIndex;
    std::vector<double> cw(n);
    for (auto& x : cw) x = 0.2 + rng.uniform();
    record("cross_entropy", check_gradients({a}, [&] { return cross_entropy(scale(a, 1.5), targets); }));
    record("cross_entropy_weighted", check_gradients({a}, [&] { return cross_entropy(a, targets, kIgnoreIndex, cw); }));
    const std::size_t heads = 2, rows = 3 + rng.below(4), width = 4;
    auto q = random_tensor(rng, {rows, width}), kk = random_tensor(rng, {rows, width}),
         v = random_tensor(rng, {rows, width}), wa = random_tensor(rng, {rows, width}, false);
    const std::size_t prefix = rng.below(rows);
    record("masked_attention", check_gradients({q, kk, v}, [&] {
             return project(masked_attention(q, kk, v, heads, prefix), wa);
           }));
  }
  double op_worst = 0;
  for (const auto& [op, e] : worst) {
    c.expect(e < 1e-4, op + " rel err " + fmt("%.2e", e));
    op_worst = std::max(op_worst, e);
  }
  c.note(std::to_string(worst.size()) + " ops, worst rel err " + fmt("%.2e", op_worst));

  // End to end on the toy architecture with both views, context prompt,
  // language-model and classification losses.
  cxr::model::ModelConfig cfg;
  cfg.vocab_size = 40;
  cfg.classifier = true;
  cxr::model::Model model(cfg, 5);
  std::vector<cxr::corpus::GrayImage> views;
  for (int i = 0; i < 2; ++i) {
    cxr::corpus::GrayImage img{32, 32, std::vector<std::uint8_t>(32 * 32)};
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.below(256));
    views.push_back(img);
  }
  cxr::corpus::TokenSeq text{cxr::corpus::Vocab::kBos, 7, 9, cxr::corpus::Vocab::kSep};
  for (int i = 0; i < 10; ++i) text.push_back(5 + static_cast<std::int64_t>(rng.below(35)));
  std::vector<std::int64_t> targets(text.begin() + 4, text.end());
  targets.push_back(cxr::corpus::Vocab::kEos);
  std::vector<cxr::corpus::LabelRow> labels(1);
  for (auto& l : labels[0]) l = static_cast<cxr::corpus::LabelClass>(rng.below(4));
  const auto weights = cxr::training::uniform_class_weights();
  auto loss = [&] {
    const auto enc = model.encode_views(views);
    const Tensor lm = cross_entropy(model.decode(enc, text, 3), targets);
    const std::vector<Tensor> heads{model.classify(enc)};
    return add(lm, scale(cxr::training::mlc_loss(heads, labels, weights), 0.1));
  };
  std::vector<Tensor> params;
  for (const auto& p : model.parameters()) params.push_back(p.tensor);
  const auto g = cxr::testing::check_gradients(params, loss, 1e-5, 6);
  c.expect(g.max_rel_error < 1e-3, "end-to-end rel err " + fmt("%.2e", g.max_rel_error));
  c.note("end-to-end " + std::to_string(g.checked) + " entries over " + std::to_string(params.size()) +
         " tensors, worst rel err " + fmt("%.2e", g.max_rel_error));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  c.expect(secs < 120, "runtime " + fmt("%.1f", secs) + " s");
  return c.outcome();
}

Outcome criterion_2() {
  using namespace cxr::metrics;
  namespace oracle = cxr::testing;
  Checks c;
  nk::Rng rng(2002);
  std::size_t mismatches = 0;
  for (int t = 0; t < 500; ++t) {
    const auto cand = oracle::random_words(rng, 8, 4);
    const auto ref = oracle::random_words(rng, 8, 4);
    mismatches += rouge_l(cand, ref) != oracle::oracle_rouge_l(cand, ref);
    mismatches += meteor(cand, ref) != oracle::oracle_meteor(cand, ref);
    const std::vector<Words> cs{cand}, rs{ref};
    for (std::size_t n = 1; n <= 4; ++n) mismatches += bleu(cs, rs, n) != oracle::oracle_bleu(cs, rs, n);
  }
  c.expect(mismatches == 0, std::to_string(mismatches) + " oracle mismatches");
  c.note("500 cases x (ROUGE-L, METEOR, BLEU-1..4) exact");

  // Identity inputs: BLEU = 1, ROUGE-L = 1, METEOR = 1 - 0.5 (1/m)^3.
  std::size_t identity_bad = 0;
  for (int t = 0; t < 100; ++t) {
    auto words = oracle::random_words(rng, 12, 6);
    if (words.size() < 4) continue;
    const std::vector<Words> same{words};
    for (std::size_t n = 1; n <= 4; ++n) identity_bad += std::abs(bleu(same, same, n) - 1.0) > 1e-12;
    identity_bad += rouge_l(words, words) != 1.0;
    const double m = static_cast<double>(words.size());
    identity_bad += std::abs(meteor(words, words) - (1.0 - 0.5 * std::pow(1.0 / m, 3))) > 1e-15;
  }
  c.expect(identity_bad == 0, std::to_string(identity_bad) + " identity deviations");
  c.note("identity scores per formula");
  return c.outcome();
}

Outcome criterion_3() {
  Checks c;
  std::vector<double> f1;
  for (const auto& row : cxr::testing::kPerLabelTable) f1.push_back(row.f1);
  const double macro = cxr::metrics::macro_average(f1);
  c.expect(std::abs(macro - 0.349) <= 0.001, "macro " + fmt("%.6f", macro));
  const auto& b = cxr::testing::kBestNlgRow;
  const double avg = cxr::metrics::avg_nlg(b.meteor, b.rouge_l, b.bleu);
  c.expect(std::abs(avg - 0.30425) <= 1e-6, "AVG_NLG " + fmt("%.8f", avg));
  c.note("macro F1 " + fmt("%.6f", macro) + " (target 0.349 +/- 0.001)");
  c.note("AVG_NLG " + fmt("%.8f", avg) + " (target 0.30425 +/- 1e-6)");
  return c.outcome();
}

Outcome criterion_4() {
  Checks c;
  nk::Rng rng(4004);
  std::vector<cxr::corpus::LabelRow> labels(16);
  for (auto& row : labels)
    for (auto& l : row) l = static_cast<cxr::corpus::LabelClass>(rng.below(4));
  const auto weights = cxr::training::compute_class_weights(labels);
  std::vector<Tensor> uniform, perfect;
  for (const auto& row : labels) {
    uniform.push_back(Tensor::full({14, 4}, rng.normal()));
    Tensor p = Tensor::full({14, 4}, -40.0);
    for (std::size_t d = 0; d < 14; ++d) p.mutable_data()[d * 4 + static_cast<std::size_t>(row[d])] = 40.0;
    perfect.push_back(p);
  }
  const double u = cxr::training::mlc_loss(uniform, labels, weights).item();
  const double p = cxr::training::mlc_loss(perfect, labels, weights).item();
  c.expect(std::abs(u - std::log(4.0)) <= 1e-9, "uniform loss " + fmt("%.12f", u));
  c.expect(p < 1e-6, "perfect loss " + fmt("%.3e", p));
  c.note("uniform " + fmt("%.12f", u) + " vs ln 4 = " + fmt("%.12f", std::log(4.0)));
  c.note("perfect " + fmt("%.3e", p));
  return c.outcome();
}

Outcome criterion_5() {
  namespace cur = cxr::curriculum;
  Checks c;
  const std::size_t n = 10000, b = 10;
  nk::Rng len_rng(5005);
  std::vector<std::size_t> lengths(n);
  for (auto& l : lengths) l = 5 + len_rng.below(180);
  const cur::CurriculumSchedule sched(lengths, {b, 0.25, 50});
  c.expect(sched.total_epochs() == 200, "total epochs " + std::to_string(sched.total_epochs()));
  const std::size_t per_epoch = sched.samples_per_epoch();
  c.expect(per_epoch == 2500, "per-epoch count " + std::to_string(per_epoch));

  std::vector<std::size_t> bin_size(b, 0);
  for (auto x : sched.bins()) ++bin_size[x - 1];

  // Observed bin composition per epoch, plus exact-count and determinism checks.
  const std::uint64_t seed = 77;
  std::vector<std::vector<std::size_t>> observed(sched.total_epochs() + 1, std::vector<std::size_t>(b, 0));
  bool counts_exact = true, distinct = true, deterministic = true;
  std::size_t budget_total = 0;
  for (std::size_t e = 1; e <= sched.total_epochs(); ++e) {
    const auto draw = sched.sample(e, seed);
    counts_exact &= draw.size() == per_epoch;
    std::vector<char> seen(n, 0);
    for (auto i : draw) {
      distinct &= i < n && !seen[i];
      if (i < n) seen[i] = 1;
      ++observed[e][sched.bins()[i] - 1];
    }
    if (e % 37 == 1) deterministic &= sched.sample(e, seed) == draw;
    budget_total += sched.epoch_budget(e);
  }
  c.expect(counts_exact, "per-epoch sample counts differ from floor(f N)");
  c.expect(distinct, "duplicate or out-of-range indices");
  c.expect(deterministic, "repeat draw with the same seed differs");
  c.expect(budget_total == 50 * n, "budgeted total " + std::to_string(budget_total));
  c.expect(sched.sample(1, seed) != sched.sample(1, seed + 1), "different seeds give identical draws");
  c.expect(sched.csv(seed) == sched.csv(seed), "schedule CSV not reproducible");

  // Expected composition per curriculum stage from an independent one-draw-
  // at-a-time simulation of sampling without replacement.
  nk::Rng oracle_rng(5150);
  const std::size_t expect_reps = 400;
  std::map<std::size_t, std::vector<double>> expected;
  for (std::size_t e = 1; e <= sched.total_epochs(); ++e) {
    const std::size_t stage = sched.current_bin(e);
    if (expected.count(stage)) continue;
    const auto w = cur::bin_weights(b, stage);
    std::vector<double> mean(b, 0.0);
    for (std::size_t r = 0; r < expect_reps; ++r) {
      const auto counts = cxr::testing::sequential_bin_counts(bin_size, w, per_epoch, oracle_rng);
      for (std::size_t k = 0; k < b; ++k) mean[k] += static_cast<double>(counts[k]) / expect_reps;
    }
    expected[stage] = mean;
  }
  auto statistic = [&](const std::vector<std::vector<std::size_t>>& obs) {
    double x2 = 0;
    for (std::size_t e = 1; e <= sched.total_epochs(); ++e) {
      const auto& ex = expected[sched.current_bin(e)];
      for (std::size_t k = 0; k < b; ++k) {
        const double d = static_cast<double>(obs[e][k]) - ex[k];
        x2 += d * d / ex[k];
      }
    }
    return x2;
  };
  const double x2 = statistic(observed);

  // Null distribution of the same statistic from fresh oracle runs.
  const std::size_t null_reps = 200;
  std::size_t at_least = 0;
  std::vector<std::vector<std::size_t>> sim(sched.total_epochs() + 1, std::vector<std::size_t>(b, 0));
  for (std::size_t r = 0; r < null_reps; ++r) {
    for (std::size_t e = 1; e <= sched.total_epochs(); ++e) {
      sim[e] = cxr::testing::sequential_bin_counts(bin_size, cur::bin_weights(b, sched.current_bin(e)), per_epoch,
                                                   oracle_rng);
    }
    at_least += statistic(sim) >= x2;
  }
  const double p = (1.0 + static_cast<double>(at_least)) / (1.0 + static_cast<double>(null_reps));
  c.expect(p > 0.01, "simulated p " + fmt("%.4f", p));
  c.note("N=10000, b=10, f=0.25, 200 epochs x 2500 draws");
  c.note("X2 " + fmt("%.1f", x2) + " over " + std::to_string(200 * b) + " cells, simulated p " + fmt("%.3f", p));
  c.note("counts exact, deterministic");
  return c.outcome();
}

Outcome criterion_6() {
  using namespace cxr::corpus;
  Checks c;
  nk::Rng rng(6006);
  std::size_t failures = 0;
  for (int t = 0; t < 1000; ++t) {
    LabelRow labels;
    for (auto& l : labels) l = static_cast<LabelClass>(rng.below(4));
    RenderOptions opts;
    const auto mode = rng.below(3);
    opts.include_impression = mode != 2;
    opts.include_findings = mode != 1;
    opts.has_lateral_view = rng.bernoulli(0.5);
    failures += rule_label(render_report(labels, rng, opts)) != labels;
  }
  c.expect(failures == 0, std::to_string(failures) + " of 1000 label vectors not recovered");
  c.note("1000 random label vectors recovered exactly");
  return c.outcome();
}

std::vector<std::string> toy_train_args(const fs::path& data, const fs::path& out, std::uint64_t seed) {
  return {"train", "--config", "toy", "--data", data.string(), "--out", out.string(), "--set",
          "seed=" + std::to_string(seed)};
}

Outcome criterion_7() {
  Checks c;
  const fs::path dir = artifact_dir("c7_learnability");
  const auto t0 = std::chrono::steady_clock::now();
  c.expect(run_tool({"gen-data", "--n", "512", "--seed", "1", "--out", (dir / "data").string()}, dir / "gen.log") == 0,
           "gen-data failed");
  auto args = toy_train_args(dir / "data", dir / "run", 1);
  args.push_back("--cls");
  const int code = run_tool(args, dir / "train.log");
  c.expect(code == 0, "train exited " + std::to_string(code));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (code != 0) return c.outcome();
  const json report = read_json(dir / "run" / "test" / "eval_report.json");
  const double f1 = report.at("F1_MI"), rl = report.at("RG_L");
  c.expect(f1 > 0.6, "F1_MI " + fmt("%.4f", f1));
  c.expect(rl > 0.4, "ROUGE-L " + fmt("%.4f", rl));
  c.expect(secs < 15 * 60, "runtime " + fmt("%.0f", secs) + " s");
  c.note("toy MV+C+CL+CLS, 512 studies, 8 effective epochs");
  c.note("test F1_MI " + fmt("%.4f", f1) + ", ROUGE-L " + fmt("%.4f", rl) + ", samples " +
         std::to_string(report.at("num_samples").get<std::size_t>()));
  c.note("runtime " + fmt("%.0f", secs) + " s");
  return c.outcome();
}

Outcome criterion_8() {
  Checks c;
  const fs::path dir = artifact_dir("c8_curriculum_effect");
  c.expect(run_tool({"gen-data", "--n", "512", "--seed", "1", "--out", (dir / "data").string()}, dir / "gen.log") == 0,
           "gen-data failed");
  std::size_t wins = 0;
  std::vector<std::string> analyze{"analyze", "--out", (dir / "ab").string()};
  std::vector<std::string> per_seed;
  for (std::uint64_t seed : {1, 2, 3}) {
    const fs::path cl = dir / ("cl_seed" + std::to_string(seed));
    const fs::path base = dir / ("nocl_seed" + std::to_string(seed));
    auto cl_args = toy_train_args(dir / "data", cl, seed);
    auto base_args = toy_train_args(dir / "data", base, seed);
    base_args.push_back("--no-curriculum");
    const int a = run_tool(cl_args, dir / ("cl_seed" + std::to_string(seed) + ".log"));
    const int b = run_tool(base_args, dir / ("nocl_seed" + std::to_string(seed) + ".log"));
    c.expect(a == 0 && b == 0, "training failed for seed " + std::to_string(seed));
    if (a != 0 || b != 0) continue;
    const auto s_cl = cxr::analysis::load_samples(cl / "test" / "samples.jsonl");
    const auto s_base = cxr::analysis::load_samples(base / "test" / "samples.jsonl");
    const double q_cl = *cxr::analysis::longest_quartile_mean(s_cl, cxr::analysis::Metric::RougeL);
    const double q_base = *cxr::analysis::longest_quartile_mean(s_base, cxr::analysis::Metric::RougeL);
    wins += q_cl >= q_base;
    per_seed.push_back("seed " + std::to_string(seed) + ": CL " + fmt("%.4f", q_cl) + " vs no-CL " +
                       fmt("%.4f", q_base));
    analyze.insert(analyze.end(), {"--run-a", base.string(), "--run-b", cl.string()});
  }
  const int code = run_tool(analyze, dir / "analyze.log");
  c.expect(code == 0, "analyze exited " + std::to_string(code));
  c.expect(wins >= 2, "curriculum ahead on longest quartile in " + std::to_string(wins) + " of 3 seeds");
  for (const auto& s : per_seed) c.note(s);
  c.note("A/B report in " + (dir / "ab").string());
  std::ofstream(dir / "summary.txt") << [&] {
    std::string s;
    for (const auto& x : per_seed) s += x + "\n";
    return s + "wins " + std::to_string(wins) + "/3\n";
  }();
  return c.outcome();
}

Outcome criterion_9() {
  Checks c;
  const fs::path dir = artifact_dir("c9_ablation");
  c.expect(run_tool({"gen-data", "--n", "120", "--seed", "9", "--out", (dir / "data").string()}, dir / "gen.log") == 0,
           "gen-data failed");
  const std::vector<std::pair<std::string, std::vector<std::string>>> grid = {
      {"MV+C+CL+CLS", {"--cls"}},
      {"SV+C+CL+CLS", {"--cls", "--single-view"}},
      {"MV+C+CL", {}},
      {"SV+C+CL", {"--single-view"}},
      {"MV+C+CLS", {"--cls", "--no-curriculum"}},
      {"SV+C+CLS", {"--cls", "--single-view", "--no-curriculum"}},
      {"MV+C", {"--no-curriculum"}},
      {"SV+C", {"--single-view", "--no-curriculum"}},
      {"MV", {"--no-context", "--no-curriculum"}},
      {"SV", {"--single-view", "--no-context", "--no-curriculum"}},
  };
  const char* keys[] = {"B1", "B2", "B3", "B4", "RG_L", "M", "F1_MA", "F1_MI", "F1_MI5", "F1_EX", "AVG_NLG"};
  std::size_t ok = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const fs::path run = dir / ("variant_" + std::to_string(i + 1));
    std::vector<std::string> args{"train",       "--data", (dir / "data").string(), "--out", run.string(),
                                  "--set",       "base_epochs=1", "--set", "test_samples=24", "--set",
                                  "val_samples=16"};
    args.insert(args.end(), grid[i].second.begin(), grid[i].second.end());
    const int code = run_tool(args, dir / ("variant_" + std::to_string(i + 1) + ".log"));
    bool complete = code == 0 && fs::exists(run / "test" / "eval_report.json") &&
                    fs::exists(run / "test" / "per_label.csv");
    if (complete) {
      const json r = read_json(run / "test" / "eval_report.json");
      for (const char* k : keys) complete &= r.contains(k) && r.at(k).is_number();
      complete &= r.contains("per_label") && r.at("per_label").size() == 14;
      const json cfg = read_json(run / "config.json");
      const bool sv = std::find(grid[i].second.begin(), grid[i].second.end(), "--single-view") != grid[i].second.end();
      complete &= cfg.at("num_views") == (sv ? 1 : 2);
    }
    c.expect(complete, grid[i].first + " (exit " + std::to_string(code) + ")");
    ok += complete;
  }
  c.note(std::to_string(ok) + "/10 variants trained one epoch and wrote complete reports");
  return c.outcome();
}

Outcome criterion_10() {
  Checks c;
  const fs::path dir = artifact_dir("c10_reproducibility");
  c.expect(run_tool({"gen-data", "--n", "96", "--seed", "10", "--out", (dir / "data").string()}, dir / "gen.log") == 0,
           "gen-data failed");
  for (const char* tag : {"a", "b"}) {
    const int code = run_tool({"train", "--data", (dir / "data").string(), "--out", (dir / tag).string(), "--cls",
                               "--set", "base_epochs=2", "--set", "test_samples=24", "--set", "val_samples=16"},
                              dir / (std::string(tag) + ".log"));
    c.expect(code == 0, std::string("run ") + tag + " exited " + std::to_string(code));
  }
  std::size_t files = 0, differ = 0;
  for (const auto& entry : fs::recursive_directory_iterator(dir / "a")) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), dir / "a");
    ++files;
    if (!fs::exists(dir / "b" / rel) || slurp(entry.path()) != slurp(dir / "b" / rel)) {
      ++differ;
      c.expect(false, rel.string() + " differs");
    }
  }
  for (const char* must : {"log.jsonl", "best.ckpt", "test/eval_report.json", "checkpoints/validation_001.ckpt"}) {
    c.expect(fs::exists(dir / "a" / must), std::string(must) + " missing");
  }
  c.note(std::to_string(files) + " files compared (logs, checkpoints, reports), " + std::to_string(differ) +
         " differ");
  return c.outcome();
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::pair<const char*, Outcome (*)()>> criteria = {
      {1, {"gradient suite", criterion_1}},        {2, {"metric oracles", criterion_2}},
      {3, {"published-table fixtures", criterion_3}}, {4, {"classification-loss fixture", criterion_4}},
      {5, {"curriculum statistics", criterion_5}}, {6, {"grammar round trip", criterion_6}},
      {7, {"learnability smoke", criterion_7}},    {8, {"curriculum effect", criterion_8}},
      {9, {"ablation wiring", criterion_9}},       {10, {"reproducibility", criterion_10}},
  };
  std::set<int> only;
  g_artifacts = fs::temp_directory_path() / "cxr_acceptance";
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) {
      only.insert(std::atoi(argv[++i]));
    } else if (a == "--artifacts" && i + 1 < argc) {
      g_artifacts = argv[++i];
    } else {
      std::cerr << "usage: acceptance [--only N]... [--artifacts DIR]\n";
      return 2;
    }
  }
  fs::create_directories(g_artifacts);
  bool all = true;
  for (const auto& [id, entry] : criteria) {
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = entry.second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "criterion " << id << " " << (o.pass ? "PASS" : "FAIL") << " " << fmt("%.1f", secs) << "s ("
              << entry.first << "): " << o.detail << std::endl;
    all &= o.pass;
  }
  return all ? 0 : 1;
}
