#include "retweet/optim/adam.hpp"

#include <cmath>

#include "retweet/errors.hpp"

namespace retweet::optim {

void adam_step(AdamState& state, std::vector<model::ParamSlot>& params) {
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p.value.shape());
      state.v.emplace_back(p.value.shape());
    }
  }
  if (state.m.size() != params.size())
    throw OptimizerError("optimizer state tracks " + std::to_string(state.m.size()) +
                         " parameters, got " + std::to_string(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    if (p.trainable && !p.grad_ready)
      throw OptimizerError("no gradient for parameter '" + p.name + "'");
    if (state.m[i].shape() != p.value.shape())
      throw OptimizerError("moment shape mismatch for parameter '" + p.name + "'");
  }

  const auto& c = state.config;
  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);

  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    if (!p.trainable) continue;
    auto theta = p.value.data();
    const auto g = p.grad.data();
    auto m = state.m[i].data();
    auto v = state.v[i].data();
    for (std::size_t j = 0; j < theta.size(); ++j) {
      m[j] = c.beta1 * m[j] + (1.0 - c.beta1) * g[j];
      v[j] = c.beta2 * v[j] + (1.0 - c.beta2) * g[j] * g[j];
      const double m_hat = m[j] / correction1;
      const double v_hat = v[j] / correction2;
      theta[j] -= c.alpha * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
    ensure_finite(p.value, "parameter " + p.name + " after update");
    p.grad.fill(0.0);
    p.grad_ready = false;
  }
}

}  // namespace retweet::optim
