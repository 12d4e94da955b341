#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cxr/corpus/pairing.hpp"
#include "cxr/corpus/study.hpp"
#include "cxr/metrics/report.hpp"
#include "cxr/model/model.hpp"
#include "cxr/numkit/optimizer.hpp"
#include "cxr/training/config.hpp"
#include "cxr/training/losses.hpp"

namespace cxr::training {

/// AVG_NLG from a metrics object holding B1..B4, RG_L and M. Throws
/// DataError naming the first missing or non-numeric key.
double avg_nlg_from_json(const nlohmann::json& metrics);

/// Patience counted in validations; only a strictly higher score resets it.
class EarlyStopper {
 public:
  explicit EarlyStopper(std::size_t patience);
  /// Records one validation score; true once the run should stop.
  bool update(double score);
  bool should_stop() const { return since_improvement_ >= patience_; }
  /// 0-based index of the best validation so far.
  std::size_t best_index() const { return best_index_; }
  double best_score() const { return best_score_; }
  std::size_t since_improvement() const { return since_improvement_; }
  std::size_t count() const { return count_; }

 private:
  std::size_t patience_;
  std::size_t count_ = 0;
  std::size_t best_index_ = 0;
  double best_score_ = 0;
  std::size_t since_improvement_ = 0;
};

/// 0-based argmax with ties going to the earliest entry. Throws DataError
/// on an empty history.
std::size_t select_checkpoint(std::span<const double> history);

/// Epoch plan: N_e epochs validated every epoch without curriculum, or
/// round(N_e / f) epochs validated every round(1 / f) epochs (and at the
/// last epoch) with it.
struct EpochPlan {
  std::size_t total_epochs = 0;
  std::size_t validate_every = 1;
  bool validates_after(std::size_t epoch) const {
    return epoch % validate_every == 0 || epoch == total_epochs;
  }
  std::size_t validation_count() const;
};
EpochPlan epoch_plan(const RunConfig& config);

/// Learning rate for 1-based optimizer step `step` of `total_steps`. The
/// cosine schedule warms up linearly over ceil(warmup_fraction * total)
/// steps, then decays to 0 at the last step.
double scheduled_learning_rate(const RunConfig& config, std::size_t step, std::size_t total_steps);

/// Forward pass of one batch. `weights` may be null when the classifier is
/// off; cls_weight is ignored then.
struct BatchLoss {
  numkit::Tensor total;
  LossBreakdown parts;
};
BatchLoss batch_loss(const model::Model& model, std::span<const corpus::TrainingSample* const> batch,
                     const ClassWeights* weights, double cls_weight);

/// Forward, finiteness check, backward and one optimizer update. Throws
/// NumericError (parameters untouched) on a non-finite loss or gradient.
LossBreakdown train_step(model::Model& model, numkit::AdamW& optimizer,
                         std::span<const corpus::TrainingSample* const> batch, const ClassWeights* weights,
                         double cls_weight);

struct ValidationRecord {
  std::size_t index = 0;  // 0-based
  std::size_t epoch = 0;
  double avg_nlg = 0;
  nlohmann::json metrics;
  /// Relative to the run directory.
  std::string checkpoint_path;
};

struct RunState {
  std::size_t epochs_run = 0;
  std::size_t steps = 0;
  std::size_t samples_seen = 0;
  bool early_stopped = false;
  std::vector<ValidationRecord> validations;
  std::size_t best_index = 0;
  double best_avg_nlg = 0;
  std::size_t since_improvement = 0;
  /// Test-split report of the best checkpoint; absent when the split is empty.
  std::optional<metrics::EvalReport> test_report;

  const ValidationRecord& best() const { return validations.at(best_index); }
};

nlohmann::json to_json(const RunState& state);

/// Full run into `out_dir`: config.txt/config.json, vocab.json, log.jsonl,
/// checkpoints/, best.ckpt, run_state.json, curriculum.csv (curriculum
/// runs) and test/ with the best checkpoint's evaluation. Same config, seed
/// and corpus give byte-identical files.
RunState train(const RunConfig& config, const std::vector<corpus::Study>& studies,
               const std::filesystem::path& out_dir);

/// Checkpoint written by train(): model, vocab and run config.
struct LoadedRun {
  model::Model model;
  corpus::Vocab vocab;
  RunConfig config;
};
LoadedRun load_run_checkpoint(const std::filesystem::path& path);

/// Samples of `split` the way train() builds them for this config.
std::vector<corpus::TrainingSample> samples_for(const RunConfig& config, const std::vector<corpus::Study>& studies,
                                                corpus::Split split, const corpus::Vocab& vocab);

}  // namespace cxr::training
