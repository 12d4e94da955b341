#include "cxr/training/inference.hpp"

#include <fstream>
#include <map>

#include "cxr/corpus/grammar.hpp"
#include "cxr/error.hpp"
#include "cxr/numkit/tensor.hpp"

namespace cxr::training {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json labels_json(const corpus::LabelRow& row) {
  json out = json::array();
  for (auto c : row) out.push_back(std::string(corpus::label_class_name(c)));
  return out;
}

corpus::LabelRow labels_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != corpus::kNumPathologies) {
    throw DataError(where + ": labels must be an array of " + std::to_string(corpus::kNumPathologies));
  }
  corpus::LabelRow row;
  for (std::size_t i = 0; i < row.size(); ++i) {
    const auto c = j[i].is_string() ? corpus::parse_label_class(j[i].get<std::string>()) : std::nullopt;
    if (!c) throw DataError(where + ": bad label class at position " + std::to_string(i));
    row[i] = *c;
  }
  return row;
}

std::vector<json> read_jsonl(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<json> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (!out.back().is_object()) throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected an object");
  }
  return out;
}

std::string require_string(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_string()) throw DataError(where + ": missing string field '" + key + "'");
  return j.at(key).get<std::string>();
}

}  // namespace

std::vector<Prediction> predict(const model::Model& model, const corpus::Vocab& vocab,
                                std::span<const corpus::TrainingSample> samples,
                                const model::GenerateOptions& options) {
  numkit::NoGradGuard no_grad;
  std::vector<Prediction> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    const auto encoding = model.encode_views(s.images);
    const corpus::TokenSeq tokens = model.generate(encoding, s.context, options);
    Prediction p;
    p.sample_id = s.sample_id;
    p.study_id = s.study_id;
    p.generated = corpus::detokenize(tokens, vocab);
    p.reference = s.report_text;
    p.labels = s.labels;
    p.target_length = s.target_report_length;
    p.generated_length = tokens.size();
    out.push_back(std::move(p));
  }
  return out;
}

metrics::EvalReport evaluate_predictions(const std::vector<Prediction>& predictions) {
  std::vector<std::string> generated, references;
  corpus::LabelGrid truth;
  for (const auto& p : predictions) {
    generated.push_back(p.generated);
    references.push_back(p.reference);
    truth.push_back(p.labels);
  }
  return metrics::evaluate(generated, references, &truth);
}

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed for " + path.string());
}

void write_predictions(const fs::path& path, const std::vector<Prediction>& predictions) {
  std::string text;
  for (const auto& p : predictions) {
    json j = {{"sample_id", p.sample_id},
              {"study_id", p.study_id},
              {"text", p.generated},
              {"generated_length", p.generated_length}};
    text += j.dump() + "\n";
  }
  write_text_file(path, text);
}

void write_references(const fs::path& path, const std::vector<Prediction>& predictions) {
  std::string text;
  for (const auto& p : predictions) {
    json j = {{"sample_id", p.sample_id},
              {"study_id", p.study_id},
              {"text", p.reference},
              {"labels", labels_json(p.labels)},
              {"target_length", p.target_length}};
    text += j.dump() + "\n";
  }
  write_text_file(path, text);
}

std::vector<Prediction> read_prediction_pair(const fs::path& predictions, const fs::path& references) {
  std::map<std::string, json> generated;
  std::size_t lineno = 0;
  for (auto& j : read_jsonl(predictions)) {
    ++lineno;
    const std::string where = predictions.string() + ": record " + std::to_string(lineno);
    const std::string id = require_string(j, "sample_id", where);
    require_string(j, "text", where);
    if (!generated.emplace(id, std::move(j)).second) throw DataError(where + ": duplicate sample_id " + id);
  }
  std::vector<Prediction> out;
  lineno = 0;
  for (const auto& j : read_jsonl(references)) {
    ++lineno;
    const std::string where = references.string() + ": record " + std::to_string(lineno);
    Prediction p;
    p.sample_id = require_string(j, "sample_id", where);
    p.reference = require_string(j, "text", where);
    if (j.contains("study_id") && j.at("study_id").is_string()) p.study_id = j.at("study_id").get<std::string>();
    p.labels = j.contains("labels") ? labels_from_json(j.at("labels"), where) : corpus::rule_label(p.reference);
    const auto ref_words = corpus::split_tokens(p.reference);
    p.target_length = j.value("target_length", ref_words.size());
    const auto it = generated.find(p.sample_id);
    if (it == generated.end()) throw DataError(where + ": no prediction for sample_id " + p.sample_id);
    p.generated = it->second.at("text").get<std::string>();
    p.generated_length = it->second.value("generated_length", corpus::split_tokens(p.generated).size());
    out.push_back(std::move(p));
  }
  if (out.empty()) throw DataError("no references in " + references.string());
  return out;
}

json sample_record(const Prediction& p, const metrics::SampleScores& scores) {
  return {{"sample_id", p.sample_id},
          {"study_id", p.study_id},
          {"generated", p.generated},
          {"reference", p.reference},
          {"generated_length", p.generated_length},
          {"target_length", p.target_length},
          {"labels", labels_json(p.labels)},
          {"predicted_labels", labels_json(corpus::rule_label(p.generated))},
          {"rouge_l", scores.rouge_l},
          {"meteor", scores.meteor}};
}

void write_eval_outputs(const fs::path& dir, const std::vector<Prediction>& predictions,
                        const metrics::EvalReport& report) {
  fs::create_directories(dir);
  write_text_file(dir / "eval_report.json", metrics::to_json(report).dump(2) + "\n");
  write_text_file(dir / "per_label.csv", metrics::per_label_csv(report.clinical));
  std::string lines;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    lines += sample_record(predictions[i], report.samples.at(i)).dump() + "\n";
  }
  write_text_file(dir / "samples.jsonl", lines);
}

}  // namespace cxr::training
