#pragma once

#include <array>
#include <span>
#include <vector>

#include "cxr/corpus/labels.hpp"
#include "cxr/numkit/tensor.hpp"

namespace cxr::training {

using numkit::Tensor;

/// Per pathology, one weight per label class.
using ClassWeights = std::vector<std::array<double, corpus::kNumLabelClasses>>;

/// Inverse class frequency per pathology (counts floored at 1), scaled so
/// each pathology's four weights average to 1.
ClassWeights compute_class_weights(std::span<const corpus::LabelRow> labels);

/// All ones.
ClassWeights uniform_class_weights(std::size_t num_pathologies = corpus::kNumPathologies);

/// Mean over heads of the weighted cross-entropy of each head over the
/// batch. head_logits holds one {D, C} tensor per sample. Throws DataError
/// when D differs from the targets or the weights.
Tensor mlc_loss(std::span<const Tensor> head_logits, std::span<const corpus::LabelRow> targets,
                const ClassWeights& weights);

struct LossBreakdown {
  double lm_loss = 0;
  double mlc_loss = 0;
  double total = 0;
  double cls_weight = 0;
};

}  // namespace cxr::training
