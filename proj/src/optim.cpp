#include "sembed/optim.hpp"

#include <cmath>

#include "sembed/errors.hpp"

namespace sembed {

AdamWState::AdamWState(const std::vector<Tensor*>& params) {
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const Tensor* p : params) {
    m_.emplace_back(p->size(), 0.0);
    v_.emplace_back(p->size(), 0.0);
  }
}

void adamw_step(const std::vector<Tensor*>& params,
                const std::vector<const std::vector<double>*>& grads,
                AdamWState& state, double lr, double beta1, double beta2,
                double eps, double weight_decay) {
  if (state.m_.empty() && !params.empty()) {
    state = AdamWState(params);
  }
  if (params.size() != grads.size() || params.size() != state.m_.size()) {
    throw ContractError("adamw_step: params/grads/state sizes disagree");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i]->size() != params[i]->size() ||
        state.m_[i].size() != params[i]->size()) {
      throw ContractError("adamw_step: shape mismatch for parameter " +
                          std::to_string(i));
    }
  }
  ++state.step_;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step_));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i]->mutable_values();
    const auto& g = *grads[i];
    auto& m = state.m_[i];
    auto& v = state.v_[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      p[j] -= lr * weight_decay * p[j];
      m[j] = beta1 * m[j] + (1.0 - beta1) * g[j];
      v[j] = beta2 * v[j] + (1.0 - beta2) * g[j] * g[j];
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      p[j] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

double lr_schedule(std::uint64_t step, std::uint64_t total_steps,
                   double base_lr, double warmup_fraction) {
  if (step > total_steps) {
    throw InputError("lr_schedule: step past total_steps");
  }
  if (warmup_fraction < 0.0 || warmup_fraction >= 1.0) {
    throw InputError("lr_schedule: warmup_fraction must be in [0, 1)");
  }
  if (total_steps == 0) return 0.0;
  const auto warmup = static_cast<std::uint64_t>(
      std::ceil(warmup_fraction * static_cast<double>(total_steps)));
  if (step >= total_steps) return 0.0;
  if (warmup > 0 && step <= warmup) {
    return base_lr * static_cast<double>(step) / static_cast<double>(warmup);
  }
  return base_lr * static_cast<double>(total_steps - step) /
         static_cast<double>(total_steps - warmup);
}

}  // namespace sembed
