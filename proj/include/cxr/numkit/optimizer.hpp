#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cxr/numkit/tensor.hpp"

namespace cxr::numkit {

struct NamedParameter {
  std::string name;
  Tensor tensor;
};

struct AdamWConfig {
  double learning_rate = 5e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.0;
};

struct MomentState {
  std::vector<double> m;
  std::vector<double> v;
};

/// One adaptive-moment update with decoupled weight decay, in place.
/// `step` is the 1-based update count used for bias correction:
///   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2
///   p <- p - lr (m_hat / (sqrt(v_hat) + eps) + wd p)
void adamw_update(std::span<double> param, std::span<const double> grad, MomentState& state,
                  const AdamWConfig& config, std::int64_t step);

class AdamW {
 public:
  AdamW(std::vector<NamedParameter> params, AdamWConfig config);

  /// Applies one update to every parameter that holds a gradient. All
  /// gradients are checked first; a non-finite entry throws NumericError
  /// naming the parameter and leaves every parameter untouched.
  void step();
  void zero_grad();

  std::int64_t step_count() const { return step_; }
  const AdamWConfig& config() const { return config_; }
  void set_learning_rate(double lr) { config_.learning_rate = lr; }
  const std::vector<NamedParameter>& parameters() const { return params_; }
  const MomentState& moments(std::size_t index) const { return state_.at(index); }

 private:
  std::vector<NamedParameter> params_;
  std::vector<MomentState> state_;
  AdamWConfig config_;
  std::int64_t step_ = 0;
};

}  // namespace cxr::numkit
