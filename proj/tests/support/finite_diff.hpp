#pragma once

// Central finite-difference oracle for gradient checks. Independent of the
// backward closures: it only evaluates forward values.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "cxr/numkit/tensor.hpp"

namespace cxr::testing {

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
};

inline double rel_error(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

/// Compares analytic gradients of `loss()` with respect to each input tensor
/// against central differences with step h. `loss` must rebuild the graph
/// from the current values of `inputs` on every call.
inline GradCheck check_gradients(std::vector<numkit::Tensor> inputs, const std::function<numkit::Tensor()>& loss,
                                 double h = 1e-5, std::size_t max_entries_per_input = 0) {
  for (auto& t : inputs) t.zero_grad();
  loss().backward();
  std::vector<std::vector<double>> analytic;
  for (auto& t : inputs) {
    if (t.has_grad()) {
      analytic.emplace_back(t.grad().begin(), t.grad().end());
    } else {
      analytic.emplace_back(t.size(), 0.0);
    }
  }

  GradCheck result;
  numkit::NoGradGuard no_grad;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    auto values = inputs[k].mutable_data();
    std::size_t stride = 1;
    if (max_entries_per_input && values.size() > max_entries_per_input) stride = values.size() / max_entries_per_input;
    for (std::size_t i = 0; i < values.size(); i += stride) {
      const double saved = values[i];
      values[i] = saved + h;
      const double up = loss().item();
      values[i] = saved - h;
      const double down = loss().item();
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      result.max_rel_error = std::max(result.max_rel_error, rel_error(analytic[k][i], numeric));
      ++result.checked;
    }
  }
  return result;
}

}  // namespace cxr::testing
