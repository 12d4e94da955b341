#include "cxr/training/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "cxr/curriculum/curriculum.hpp"
#include "cxr/error.hpp"
#include "cxr/log.hpp"
#include "cxr/numkit/checkpoint.hpp"
#include "cxr/numkit/random.hpp"
#include "cxr/training/inference.hpp"

namespace cxr::training {

namespace fs = std::filesystem;
using nlohmann::json;
using numkit::Tensor;

namespace {

// Sub-streams of the run seed.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kOrderStream = 2;
constexpr std::uint64_t kCurriculumStream = 3;
constexpr std::uint64_t kValidationStream = 4;
constexpr std::uint64_t kTestStream = 5;

const char* const kMetricKeys[] = {"B1", "B2", "B3", "B4", "RG_L", "M", "F1_MA", "F1_MI", "F1_MI5", "F1_EX", "AVG_NLG"};

std::vector<corpus::TrainingSample> subsample(std::vector<corpus::TrainingSample> samples, std::size_t cap,
                                              std::uint64_t seed) {
  if (cap == 0 || samples.size() <= cap) return samples;
  std::vector<std::size_t> idx(samples.size());
  std::iota(idx.begin(), idx.end(), 0);
  numkit::Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(idx));
  idx.resize(cap);
  std::sort(idx.begin(), idx.end());
  std::vector<corpus::TrainingSample> out;
  out.reserve(cap);
  for (std::size_t i : idx) out.push_back(std::move(samples[i]));
  return out;
}

json summary_metrics(const metrics::EvalReport& report) {
  const json full = metrics::to_json(report);
  json out = json::object();
  for (const char* key : kMetricKeys) out[key] = full.at(key);
  return out;
}

std::string checkpoint_name(std::size_t index) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "checkpoints/validation_%03zu.ckpt", index + 1);
  return buf;
}

void check_finite(double value, const char* what, std::size_t step) {
  if (!std::isfinite(value)) {
    std::ostringstream msg;
    msg << "non-finite " << what << " (" << value << ") at step " << step;
    throw NumericError(msg.str());
  }
}

}  // namespace

double avg_nlg_from_json(const json& m) {
  auto get = [&](const char* key) {
    if (!m.is_object() || !m.contains(key) || !m.at(key).is_number()) {
      throw DataError(std::string("AVG_NLG needs metric '") + key + "'");
    }
    return m.at(key).get<double>();
  };
  return metrics::avg_nlg(get("M"), get("RG_L"), {get("B1"), get("B2"), get("B3"), get("B4")});
}

EarlyStopper::EarlyStopper(std::size_t patience) : patience_(patience) {
  if (patience == 0) throw UsageError("patience must be >= 1");
}

bool EarlyStopper::update(double score) {
  if (count_ == 0 || score > best_score_) {
    best_score_ = score;
    best_index_ = count_;
    since_improvement_ = 0;
  } else {
    ++since_improvement_;
  }
  ++count_;
  return should_stop();
}

std::size_t select_checkpoint(std::span<const double> history) {
  if (history.empty()) throw DataError("no validation history to select from");
  std::size_t best = 0;
  for (std::size_t i = 1; i < history.size(); ++i) {
    if (history[i] > history[best]) best = i;
  }
  return best;
}

std::size_t EpochPlan::validation_count() const {
  std::size_t n = 0;
  for (std::size_t e = 1; e <= total_epochs; ++e) n += validates_after(e);
  return n;
}

EpochPlan epoch_plan(const RunConfig& config) {
  EpochPlan plan;
  if (!config.curriculum) {
    plan.total_epochs = config.base_epochs;
    plan.validate_every = 1;
    return plan;
  }
  plan.total_epochs = static_cast<std::size_t>(std::llround(static_cast<double>(config.base_epochs) / config.fraction));
  plan.validate_every = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(1.0 / config.fraction)));
  return plan;
}

double scheduled_learning_rate(const RunConfig& config, std::size_t step, std::size_t total_steps) {
  if (config.lr_schedule == "constant") return config.learning_rate;
  if (step == 0 || total_steps == 0) throw UsageError("learning-rate schedule needs 1-based steps");
  const auto warmup = static_cast<std::size_t>(std::ceil(config.warmup_fraction * static_cast<double>(total_steps)));
  if (step <= warmup) return config.learning_rate * static_cast<double>(step) / static_cast<double>(warmup);
  const double progress =
      std::min(1.0, static_cast<double>(step - warmup) / static_cast<double>(total_steps - warmup));
  return config.learning_rate * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

BatchLoss batch_loss(const model::Model& model, std::span<const corpus::TrainingSample* const> batch,
                     const ClassWeights* weights, double cls_weight) {
  if (batch.empty()) throw DataError("empty batch");
  const bool use_cls = model.config().classifier && weights != nullptr;
  std::vector<Tensor> lm_rows;
  std::vector<std::int64_t> targets;
  std::vector<Tensor> cls_logits;
  std::vector<corpus::LabelRow> cls_targets;
  for (const corpus::TrainingSample* s : batch) {
    corpus::TokenSeq text;
    text.reserve(s->context.size() + s->report.size() + 2);
    text.push_back(corpus::Vocab::kBos);
    text.insert(text.end(), s->context.begin(), s->context.end());
    text.push_back(corpus::Vocab::kSep);
    text.insert(text.end(), s->report.begin(), s->report.end());
    const auto encoding = model.encode_views(s->images);
    lm_rows.push_back(model.decode(encoding, text, s->context.size() + 1));
    targets.insert(targets.end(), s->report.begin(), s->report.end());
    targets.push_back(corpus::Vocab::kEos);
    if (use_cls) {
      cls_logits.push_back(model.classify(encoding));
      cls_targets.push_back(s->labels);
    }
  }
  BatchLoss out;
  const Tensor lm = numkit::cross_entropy(numkit::concat_rows(lm_rows), targets);
  out.parts.lm_loss = lm.item();
  if (use_cls) {
    const Tensor mlc = mlc_loss(cls_logits, cls_targets, *weights);
    out.parts.mlc_loss = mlc.item();
    out.parts.cls_weight = cls_weight;
    out.total = numkit::add(lm, numkit::scale(mlc, cls_weight));
  } else {
    out.total = lm;
  }
  out.parts.total = out.total.item();
  return out;
}

LossBreakdown train_step(model::Model& model, numkit::AdamW& optimizer,
                         std::span<const corpus::TrainingSample* const> batch, const ClassWeights* weights,
                         double cls_weight) {
  optimizer.zero_grad();
  BatchLoss loss = batch_loss(model, batch, weights, cls_weight);
  const std::size_t step = static_cast<std::size_t>(optimizer.step_count()) + 1;
  check_finite(loss.parts.lm_loss, "language-model loss", step);
  check_finite(loss.parts.mlc_loss, "classification loss", step);
  check_finite(loss.parts.total, "total loss", step);
  loss.total.backward();
  optimizer.step();
  optimizer.zero_grad();
  return loss.parts;
}

json to_json(const RunState& state) {
  json j = {{"epochs_run", state.epochs_run},
            {"steps", state.steps},
            {"samples_seen", state.samples_seen},
            {"early_stopped", state.early_stopped},
            {"best_index", state.best_index},
            {"best_avg_nlg", state.best_avg_nlg},
            {"since_improvement", state.since_improvement}};
  if (!state.validations.empty()) j["best_checkpoint"] = state.best().checkpoint_path;
  json vals = json::array();
  for (const auto& v : state.validations) {
    vals.push_back({{"validation", v.index + 1},
                    {"epoch", v.epoch},
                    {"AVG_NLG", v.avg_nlg},
                    {"checkpoint_path", v.checkpoint_path}});
  }
  j["validations"] = vals;
  if (state.test_report) j["test"] = summary_metrics(*state.test_report);
  return j;
}

std::vector<corpus::TrainingSample> samples_for(const RunConfig& config, const std::vector<corpus::Study>& studies,
                                                corpus::Split split, const corpus::Vocab& vocab) {
  corpus::SampleOptions options;
  options.use_context = config.use_context;
  options.max_context_tokens = config.max_context_tokens;
  options.max_text_tokens = config.max_text_len;
  std::size_t skipped = 0;
  auto samples = corpus::build_samples(studies, split, config.num_views, vocab, options, &skipped);
  if (skipped > 0) {
    log::info(std::to_string(skipped) + " " + std::string(corpus::split_name(split)) +
              " studies without a frontal view skipped");
  }
  return samples;
}

LoadedRun load_run_checkpoint(const fs::path& path) {
  const numkit::Checkpoint ckpt = numkit::load_checkpoint(path);
  if (!ckpt.meta.contains("model") || !ckpt.meta.contains("vocab") || !ckpt.meta.contains("run")) {
    throw DataError(path.string() + ": checkpoint lacks model/vocab/run metadata");
  }
  LoadedRun run{model::Model(model::model_config_from_json(ckpt.meta.at("model")), 0),
                corpus::Vocab::from_json(ckpt.meta.at("vocab")), run_config_from_json(ckpt.meta.at("run"))};
  numkit::restore_parameters(ckpt, run.model.parameters());
  return run;
}

RunState train(const RunConfig& config, const std::vector<corpus::Study>& studies, const fs::path& out_dir) {
  config.validate();
  fs::create_directories(out_dir / "checkpoints");
  write_text_file(out_dir / "config.txt", to_text(config));
  write_text_file(out_dir / "config.json", to_json(config).dump(2) + "\n");

  const corpus::Vocab vocab = corpus::build_vocab(studies);
  write_text_file(out_dir / "vocab.json", vocab.to_json().dump() + "\n");

  const auto train_set = samples_for(config, studies, corpus::Split::Train, vocab);
  if (train_set.empty()) throw DataError("no training samples in the corpus");
  const auto val_set = subsample(samples_for(config, studies, corpus::Split::Validation, vocab), config.val_samples,
                                 numkit::derive_seed(config.seed, kValidationStream));
  if (val_set.empty()) throw DataError("no validation samples in the corpus");

  model::Model model(config.model_config(vocab.size()), numkit::derive_seed(config.seed, kInitStream));
  numkit::AdamWConfig opt;
  opt.learning_rate = config.learning_rate;
  opt.weight_decay = config.weight_decay;
  numkit::AdamW optimizer(model.parameters(), opt);

  std::optional<ClassWeights> class_weights;
  if (config.classifier) {
    corpus::LabelGrid labels;
    for (const auto& s : train_set) labels.push_back(s.labels);
    class_weights = compute_class_weights(labels);
  }

  const EpochPlan plan = epoch_plan(config);
  std::optional<curriculum::CurriculumSchedule> schedule;
  std::string curriculum_csv = "epoch,bin,expected_mass,realized_count\n";
  if (config.curriculum) {
    std::vector<std::size_t> lengths;
    for (const auto& s : train_set) lengths.push_back(s.target_report_length);
    schedule.emplace(lengths, curriculum::ScheduleConfig{config.bins, config.fraction, config.base_epochs});
  }

  const json meta_base = {{"model", model::to_json(model.config())}, {"vocab", vocab.to_json()}, {"run", to_json(config)}};
  std::ofstream log_file(out_dir / "log.jsonl", std::ios::binary);
  if (!log_file) throw DataError("cannot write " + (out_dir / "log.jsonl").string());
  auto emit = [&](const json& record) {
    log_file << record.dump() << '\n';
    log_file.flush();
  };

  std::size_t total_steps = 0;
  for (std::size_t e = 1; e <= plan.total_epochs; ++e) {
    const std::size_t n = schedule ? schedule->epoch_budget(e) : train_set.size();
    total_steps += (n + config.batch_size - 1) / config.batch_size;
  }

  RunState state;
  EarlyStopper stopper(config.patience);
  model::GenerateOptions val_decode;
  val_decode.max_text_len = config.max_text_len;

  for (std::size_t epoch = 1; epoch <= plan.total_epochs; ++epoch) {
    std::vector<std::size_t> order;
    if (schedule) {
      order = schedule->sample_budgeted(epoch, numkit::derive_seed(config.seed, kCurriculumStream));
      const auto w = schedule->weights(epoch);
      std::vector<double> expected(config.bins, 0.0);
      std::vector<std::size_t> realized(config.bins, 0);
      for (std::size_t i = 0; i < w.size(); ++i) expected[schedule->bins()[i] - 1] += w[i];
      for (std::size_t i : order) ++realized[schedule->bins()[i] - 1];
      for (std::size_t b = 0; b < config.bins; ++b) {
        char row[96];
        std::snprintf(row, sizeof row, "%zu,%zu,%.17g,%zu\n", epoch, b + 1, expected[b], realized[b]);
        curriculum_csv += row;
      }
    } else {
      order.resize(train_set.size());
      std::iota(order.begin(), order.end(), 0);
      numkit::Rng rng(numkit::derive_seed(numkit::derive_seed(config.seed, kOrderStream), epoch));
      rng.shuffle(std::span<std::size_t>(order));
    }
    if (order.empty()) throw DataError("epoch " + std::to_string(epoch) + " drew no samples");

    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::vector<const corpus::TrainingSample*> batch;
      for (std::size_t i = start; i < end; ++i) batch.push_back(&train_set[order[i]]);
      optimizer.set_learning_rate(scheduled_learning_rate(config, state.steps + 1, total_steps));
      LossBreakdown parts;
      try {
        parts = train_step(model, optimizer, batch, class_weights ? &*class_weights : nullptr, config.cls_weight);
      } catch (const NumericError& e) {
        throw NumericError("epoch " + std::to_string(epoch) + ": " + e.what());
      }
      ++state.steps;
      state.samples_seen += batch.size();
      emit({{"type", "step"},
            {"epoch", epoch},
            {"step", state.steps},
            {"lm_loss", parts.lm_loss},
            {"mlc_loss", parts.mlc_loss},
            {"total", parts.total}});
    }
    state.epochs_run = epoch;

    if (!plan.validates_after(epoch)) continue;
    const auto preds = predict(model, vocab, val_set, val_decode);
    const auto report = evaluate_predictions(preds);
    ValidationRecord rec;
    rec.index = state.validations.size();
    rec.epoch = epoch;
    rec.metrics = summary_metrics(report);
    rec.avg_nlg = report.avg_nlg();
    rec.checkpoint_path = checkpoint_name(rec.index);
    json meta = meta_base;
    meta["epoch"] = epoch;
    meta["validation"] = rec.index + 1;
    numkit::save_checkpoint(out_dir / rec.checkpoint_path, model.parameters(), meta);

    json line = {{"type", "validation"}, {"epoch", epoch}, {"validation", rec.index + 1}};
    for (const auto& [k, v] : rec.metrics.items()) line[k] = v;
    line["checkpoint_path"] = rec.checkpoint_path;
    emit(line);
    log::info("epoch " + std::to_string(epoch) + " validation " + std::to_string(rec.index + 1) +
              ": AVG_NLG " + std::to_string(rec.avg_nlg));

    state.validations.push_back(std::move(rec));
    const bool stop = stopper.update(state.validations.back().avg_nlg);
    state.best_index = stopper.best_index();
    state.best_avg_nlg = stopper.best_score();
    state.since_improvement = stopper.since_improvement();
    if (stop) {
      state.early_stopped = true;
      log::info("early stop after validation " + std::to_string(stopper.count()));
      break;
    }
  }

  if (schedule) write_text_file(out_dir / "curriculum.csv", curriculum_csv);
  const fs::path best_path = out_dir / state.best().checkpoint_path;
  fs::copy_file(best_path, out_dir / "best.ckpt", fs::copy_options::overwrite_existing);

  const auto test_set = subsample(samples_for(config, studies, corpus::Split::Test, vocab), config.test_samples,
                                  numkit::derive_seed(config.seed, kTestStream));
  if (!test_set.empty()) {
    numkit::restore_parameters(numkit::load_checkpoint(best_path), model.parameters());
    model::GenerateOptions decode;
    decode.max_text_len = config.max_text_len;
    decode.beam_size = config.beam_size;
    const auto preds = predict(model, vocab, test_set, decode);
    state.test_report = evaluate_predictions(preds);
    write_predictions(out_dir / "test" / "predictions.jsonl", preds);
    write_references(out_dir / "test" / "references.jsonl", preds);
    write_eval_outputs(out_dir / "test", preds, *state.test_report);
  } else {
    log::warn("test split is empty; no evaluation written");
  }
  write_text_file(out_dir / "run_state.json", to_json(state).dump(2) + "\n");
  return state;
}

}  // namespace cxr::training
