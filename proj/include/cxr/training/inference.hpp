#pragma once

// Batch decoding and evaluation artifacts shared by training, the generate
// command and the eval command.

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cxr/corpus/pairing.hpp"
#include "cxr/metrics/report.hpp"
#include "cxr/model/model.hpp"

namespace cxr::training {

struct Prediction {
  std::string sample_id;
  std::string study_id;
  std::string generated;
  /// Preprocessed reference report.
  std::string reference;
  corpus::LabelRow labels = corpus::all_missing();
  std::size_t target_length = 0;
  std::size_t generated_length = 0;
};

/// Decodes every sample in order.
std::vector<Prediction> predict(const model::Model& model, const corpus::Vocab& vocab,
                                std::span<const corpus::TrainingSample> samples,
                                const model::GenerateOptions& options = {});

/// Scores against the stored reference labels.
metrics::EvalReport evaluate_predictions(const std::vector<Prediction>& predictions);

/// predictions.jsonl: {sample_id, study_id, text, generated_length}.
void write_predictions(const std::filesystem::path& path, const std::vector<Prediction>& predictions);
/// references.jsonl: {sample_id, study_id, text, labels, target_length}.
void write_references(const std::filesystem::path& path, const std::vector<Prediction>& predictions);
/// Joins the two files on sample_id in reference order. Every reference
/// needs a prediction; throws DataError otherwise or on malformed lines.
std::vector<Prediction> read_prediction_pair(const std::filesystem::path& predictions,
                                             const std::filesystem::path& references);

/// One record per sample with text, lengths, label rows and scores.
nlohmann::json sample_record(const Prediction& prediction, const metrics::SampleScores& scores);

/// Writes eval_report.json, per_label.csv and samples.jsonl into `dir`.
void write_eval_outputs(const std::filesystem::path& dir, const std::vector<Prediction>& predictions,
                        const metrics::EvalReport& report);

/// Writes text exactly, creating parent directories.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace cxr::training
