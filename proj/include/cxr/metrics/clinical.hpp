#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cxr/corpus/labels.hpp"

namespace cxr::metrics {

struct LabelScore {
  double f1 = 0;
  double precision = 0;
  double recall = 0;
  /// Positive ground-truth count.
  std::size_t support = 0;
  std::size_t tp = 0, fp = 0, fn = 0;
};

struct ClinicalF1 {
  double macro = 0;
  double micro = 0;
  double micro5 = 0;
  double example = 0;
  std::array<LabelScore, corpus::kNumPathologies> per_label{};
};

/// Binary F1 of the Positive class from counts. When tp + fp + fn == 0 the
/// label is absent on both sides and scores 1; otherwise an empty
/// denominator gives 0.
LabelScore label_score(std::size_t tp, std::size_t fp, std::size_t fn);

/// Throws DataError when the grids differ in length.
ClinicalF1 clinical_f1(const corpus::LabelGrid& predicted, const corpus::LabelGrid& truth);

double macro_average(std::span<const double> per_label_f1);

/// Pathology indices of the 5 most frequent true-Positive labels, ties by
/// pathology order.
std::array<std::size_t, 5> most_frequent_five(const corpus::LabelGrid& truth);

/// rule_label applied per report.
corpus::LabelGrid label_predictions(const std::vector<std::string>& reports);

}  // namespace cxr::metrics
