#pragma once

#include <string>
#include <vector>

#include "ccsp/graph.hpp"

namespace ccsp::ad {

struct AdamOptions {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double l1 = 0.0;
  double l2 = 0.0;
};

// Moment estimates for one parameter tensor.
struct AdamSlot {
  std::string name;
  Tensor m;
  Tensor v;
  bool regularized = false;
};

// One bias-corrected Adam update of `param` in place. Regularized parameters
// get l2 * theta + l1 * sign(theta) added to their gradient first. `step` is
// the 1-based step count after increment.
void adam_update(const AdamOptions& options, long step, Tensor& param, const Tensor& grad, AdamSlot& slot);

// A parameter group sharing one learning rate and step counter.
class Adam {
 public:
  explicit Adam(AdamOptions options = {}) : options_(options) {}

  void add_parameter(Var param, bool regularized);
  // Applies one update to every registered parameter from its current adjoint.
  void step();
  void zero_grad();

  const AdamOptions& options() const noexcept { return options_; }
  long step_count() const noexcept { return step_count_; }
  const std::vector<AdamSlot>& slots() const noexcept { return slots_; }
  std::vector<AdamSlot>& mutable_slots() noexcept { return slots_; }
  void restore(long step_count) { step_count_ = step_count; }

 private:
  AdamOptions options_;
  long step_count_ = 0;
  std::vector<Var> params_;
  std::vector<AdamSlot> slots_;
};

}  // namespace ccsp::ad
