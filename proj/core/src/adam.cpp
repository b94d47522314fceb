#include "ccsp/adam.hpp"

#include <cmath>

#include <fmt/format.h>

#include "ccsp/error.hpp"

namespace ccsp::ad {

void adam_update(const AdamOptions& options, long step, Tensor& param, const Tensor& grad, AdamSlot& slot) {
  if (grad.size() != param.size() || slot.m.size() != param.size() || slot.v.size() != param.size()) {
    throw_invalid(fmt::format("adam: shape mismatch for parameter '{}'", slot.name));
  }
  if (const auto bad = grad.first_non_finite(); bad != grad.size()) {
    throw_numerical(fmt::format("adam: non-finite gradient for parameter '{}' at index {}", slot.name, bad));
  }
  const double bc1 = 1.0 - std::pow(options.beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(options.beta2, static_cast<double>(step));
  for (std::size_t i = 0; i < param.size(); ++i) {
    double g = grad[i];
    if (slot.regularized) {
      const double theta = param[i];
      g += options.l2 * theta + options.l1 * static_cast<double>((theta > 0.0) - (theta < 0.0));
    }
    slot.m[i] = options.beta1 * slot.m[i] + (1.0 - options.beta1) * g;
    slot.v[i] = options.beta2 * slot.v[i] + (1.0 - options.beta2) * g * g;
    const double m_hat = slot.m[i] / bc1;
    const double v_hat = slot.v[i] / bc2;
    param[i] -= options.lr * m_hat / (std::sqrt(v_hat) + options.eps);
  }
}

void Adam::add_parameter(Var param, bool regularized) {
  AdamSlot slot;
  slot.name = param.name();
  slot.m = Tensor(param.shape());
  slot.v = Tensor(param.shape());
  slot.regularized = regularized;
  slots_.push_back(std::move(slot));
  params_.push_back(std::move(param));
}

void Adam::step() {
  ++step_count_;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    adam_update(options_, step_count_, params_[i].mutable_value(), params_[i].grad(), slots_[i]);
  }
}

void Adam::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

}  // namespace ccsp::ad
