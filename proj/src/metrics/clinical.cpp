#include "cxr/metrics/clinical.hpp"

#include <algorithm>
#include <numeric>

#include "cxr/corpus/grammar.hpp"
#include "cxr/error.hpp"

namespace cxr::metrics {

using corpus::kNumPathologies;
using corpus::LabelClass;

LabelScore label_score(std::size_t tp, std::size_t fp, std::size_t fn) {
  LabelScore s;
  s.tp = tp, s.fp = fp, s.fn = fn;
  s.support = tp + fn;
  if (tp + fp + fn == 0) {
    s.f1 = s.precision = s.recall = 1.0;
    return s;
  }
  s.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  s.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  s.f1 = 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
  return s;
}

double macro_average(std::span<const double> f1) {
  if (f1.empty()) return 0.0;
  return std::accumulate(f1.begin(), f1.end(), 0.0) / static_cast<double>(f1.size());
}

std::array<std::size_t, 5> most_frequent_five(const corpus::LabelGrid& truth) {
  std::array<std::size_t, kNumPathologies> counts{};
  for (const auto& row : truth)
    for (std::size_t p = 0; p < kNumPathologies; ++p) counts[p] += row[p] == LabelClass::Positive;
  std::array<std::size_t, kNumPathologies> order;
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return counts[a] > counts[b]; });
  std::array<std::size_t, 5> top;
  std::copy_n(order.begin(), 5, top.begin());
  return top;
}

ClinicalF1 clinical_f1(const corpus::LabelGrid& predicted, const corpus::LabelGrid& truth) {
  if (predicted.size() != truth.size()) {
    throw DataError("label grids differ in length: " + std::to_string(predicted.size()) + " predicted vs " +
                    std::to_string(truth.size()) + " true");
  }
  std::array<std::size_t, kNumPathologies> tp{}, fp{}, fn{};
  double example_sum = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    std::size_t s_tp = 0, s_fp = 0, s_fn = 0;
    for (std::size_t p = 0; p < kNumPathologies; ++p) {
      const bool pred = predicted[i][p] == LabelClass::Positive;
      const bool real = truth[i][p] == LabelClass::Positive;
      s_tp += pred && real;
      s_fp += pred && !real;
      s_fn += !pred && real;
    }
    for (std::size_t p = 0; p < kNumPathologies; ++p) {
      const bool pred = predicted[i][p] == LabelClass::Positive;
      const bool real = truth[i][p] == LabelClass::Positive;
      tp[p] += pred && real;
      fp[p] += pred && !real;
      fn[p] += !pred && real;
    }
    example_sum += s_tp + s_fp + s_fn == 0 ? 1.0 : 2.0 * s_tp / static_cast<double>(2 * s_tp + s_fp + s_fn);
  }

  ClinicalF1 out;
  std::array<double, kNumPathologies> f1{};
  std::size_t all_tp = 0, all_fp = 0, all_fn = 0;
  for (std::size_t p = 0; p < kNumPathologies; ++p) {
    out.per_label[p] = label_score(tp[p], fp[p], fn[p]);
    f1[p] = out.per_label[p].f1;
    all_tp += tp[p], all_fp += fp[p], all_fn += fn[p];
  }
  out.macro = macro_average(f1);
  out.micro = label_score(all_tp, all_fp, all_fn).f1;
  std::size_t t5 = 0, f5 = 0, n5 = 0;
  for (std::size_t p : most_frequent_five(truth)) t5 += tp[p], f5 += fp[p], n5 += fn[p];
  out.micro5 = label_score(t5, f5, n5).f1;
  out.example = truth.empty() ? 0.0 : example_sum / static_cast<double>(truth.size());
  return out;
}

corpus::LabelGrid label_predictions(const std::vector<std::string>& reports) {
  corpus::LabelGrid grid;
  grid.reserve(reports.size());
  for (const auto& r : reports) grid.push_back(corpus::rule_label(r));
  return grid;
}

}  // namespace cxr::metrics
