#include "cxr/numkit/optimizer.hpp"

#include <cmath>

#include "cxr/error.hpp"

namespace cxr::numkit {

void adamw_update(std::span<double> param, std::span<const double> grad, MomentState& state,
                  const AdamWConfig& config, std::int64_t step) {
  if (grad.size() != param.size()) throw ShapeError("adamw_update: gradient size does not match parameter");
  if (state.m.size() != param.size()) state.m.assign(param.size(), 0.0);
  if (state.v.size() != param.size()) state.v.assign(param.size(), 0.0);
  const double t = static_cast<double>(step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * g;
    state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * g * g;
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    param[i] -= config.learning_rate * (m_hat / (std::sqrt(v_hat) + config.epsilon) + config.weight_decay * param[i]);
  }
}

AdamW::AdamW(std::vector<NamedParameter> params, AdamWConfig config)
    : params_(std::move(params)), state_(params_.size()), config_(config) {}

void AdamW::step() {
  for (const auto& p : params_) {
    if (!p.tensor.has_grad()) continue;
    for (double g : p.tensor.grad()) {
      if (!std::isfinite(g)) throw NumericError("non-finite gradient in parameter '" + p.name + "'");
    }
  }
  ++step_;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor& t = params_[i].tensor;
    if (!t.has_grad()) continue;
    adamw_update(t.mutable_data(), t.grad(), state_[i], config_, step_);
  }
}

void AdamW::zero_grad() {
  for (auto& p : params_) p.tensor.zero_grad();
}

}  // namespace cxr::numkit
