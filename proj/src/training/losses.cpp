#include "cxr/training/losses.hpp"

#include <algorithm>

#include "cxr/error.hpp"

namespace cxr::training {

using corpus::kNumLabelClasses;

ClassWeights compute_class_weights(std::span<const corpus::LabelRow> labels) {
  ClassWeights w(corpus::kNumPathologies);
  for (std::size_t p = 0; p < corpus::kNumPathologies; ++p) {
    std::array<double, kNumLabelClasses> count{};
    for (const auto& row : labels) count[static_cast<std::size_t>(row[p])] += 1;
    double total = 0;
    for (std::size_t c = 0; c < kNumLabelClasses; ++c) {
      w[p][c] = 1.0 / std::max(count[c], 1.0);
      total += w[p][c];
    }
    for (auto& x : w[p]) x *= static_cast<double>(kNumLabelClasses) / total;
  }
  return w;
}

ClassWeights uniform_class_weights(std::size_t num_pathologies) {
  ClassWeights w(num_pathologies);
  for (auto& row : w) row.fill(1.0);
  return w;
}

Tensor mlc_loss(std::span<const Tensor> head_logits, std::span<const corpus::LabelRow> targets,
                const ClassWeights& weights) {
  if (head_logits.empty() || head_logits.size() != targets.size()) {
    throw DataError("classification loss needs one target row per sample");
  }
  const std::size_t d = head_logits[0].dim(0);
  if (d != corpus::kNumPathologies || weights.size() != d) {
    throw DataError("classification loss: " + std::to_string(d) + " heads, " +
                    std::to_string(corpus::kNumPathologies) + " label columns and " + std::to_string(weights.size()) +
                    " weight rows must agree");
  }
  Tensor total;
  for (std::size_t i = 0; i < d; ++i) {
    std::vector<Tensor> rows;
    std::vector<std::int64_t> y;
    for (std::size_t n = 0; n < head_logits.size(); ++n) {
      rows.push_back(numkit::slice_rows(head_logits[n], i, 1));
      y.push_back(static_cast<std::int64_t>(targets[n][i]));
    }
    const Tensor head = numkit::cross_entropy(numkit::concat_rows(rows), y, numkit::kIgnoreIndex, weights[i]);
    total = i == 0 ? head : numkit::add(total, head);
  }
  return numkit::scale(total, 1.0 / static_cast<double>(d));
}

}  // namespace cxr::training
