#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "cxr/corpus/labels.hpp"
#include "cxr/metrics/clinical.hpp"
#include "cxr/metrics/nlg.hpp"

namespace cxr::metrics {

struct SampleScores {
  double rouge_l = 0;
  double meteor = 0;
};

struct EvalReport {
  std::array<double, 4> bleu{};
  double rouge_l = 0;
  double meteor = 0;
  ClinicalF1 clinical;
  /// Per-sample scores, in input order.
  std::vector<SampleScores> samples;

  double avg_nlg() const { return metrics::avg_nlg(meteor, rouge_l, bleu); }
};

/// Scores generated reports against references. Texts are split with the
/// corpus tokenizer; reference labels come from `truth` when given,
/// otherwise from labeling the references.
EvalReport evaluate(const std::vector<std::string>& generated, const std::vector<std::string>& references,
                    const corpus::LabelGrid* truth = nullptr);

/// Summary fields plus the per-label table; per-sample scores are left out.
nlohmann::json to_json(const EvalReport& report);
/// "Category,F1,P,R,Support" then one row per pathology and the
/// MACRO_AVG / MICRO_AVG rows.
std::string per_label_csv(const ClinicalF1& clinical);

}  // namespace cxr::metrics
