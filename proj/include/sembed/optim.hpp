#pragma once

#include <cstdint>
#include <vector>

#include "sembed/tensor.hpp"

namespace sembed {

// Per-parameter first/second moment buffers plus the shared step counter.
class AdamWState {
 public:
  AdamWState() = default;
  explicit AdamWState(const std::vector<Tensor*>& params);

  std::uint64_t step_count() const { return step_; }

 private:
  friend void adamw_step(const std::vector<Tensor*>&,
                         const std::vector<const std::vector<double>*>&,
                         AdamWState&, double, double, double, double, double);
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  std::uint64_t step_ = 0;
};

// Decoupled weight decay (param -= lr * wd * param) followed by the
// bias-corrected Adam update. Shapes must mirror the state.
void adamw_step(const std::vector<Tensor*>& params,
                const std::vector<const std::vector<double>*>& grads,
                AdamWState& state, double lr, double beta1 = 0.9,
                double beta2 = 0.999, double eps = 1e-8,
                double weight_decay = 0.0);

// Linear warmup from 0 over ceil(warmup_fraction * total_steps) steps, then
// linear decay to 0 at total_steps.
double lr_schedule(std::uint64_t step, std::uint64_t total_steps,
                   double base_lr, double warmup_fraction);

}  // namespace sembed
