#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tqa/tensor.hpp"

namespace tqa {

struct AdamState {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t step = 0;
  // One entry per parameter, in the order passed to adam_step.
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
};

// Bias-corrected Adam update of every parameter from its accumulated grad.
// Moments are allocated on the first call; later calls must pass parameters
// of the same shapes in the same order.
void adam_step(std::span<Tensor> params, AdamState& state);

}  // namespace tqa
