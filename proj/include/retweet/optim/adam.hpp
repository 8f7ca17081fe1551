#pragma once

#include <cstdint>
#include <vector>

#include "retweet/model/model.hpp"

namespace retweet::optim {

struct AdamConfig {
  double alpha = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
};

// First and second moment estimates, one pair per parameter slot, created
// lazily on the first step.
struct AdamState {
  AdamConfig config;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::uint64_t t = 0;
};

// m <- b1 m + (1 - b1) g;  v <- b2 v + (1 - b2) g^2
// theta <- theta - alpha * m_hat / (sqrt(v_hat) + eps), with bias-corrected
// m_hat = m / (1 - b1^t) and v_hat = v / (1 - b2^t).
// Throws OptimizerError if a trainable slot has no gradient; clears
// gradients afterwards.
void adam_step(AdamState& state, std::vector<model::ParamSlot>& params);

}  // namespace retweet::optim
