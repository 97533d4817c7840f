#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tqa/tensor.hpp"

namespace tqa {

struct GradcheckReport {
  std::string name;
  double relative_error = 0.0;
  bool passed = false;
  // Coordinates left out because a perturbation changed a max-pool winner.
  std::size_t skipped = 0;
};

struct InputCheck {
  double relative_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
};

// Compares backward() against central finite differences for every element
// of every input. Returns the worst per-input relative error
// ||analytic - numeric|| / max(||analytic|| + ||numeric||, 1e-6).
// Coordinates whose +/- step moves any max-pool winner sit on a kink and are
// left out.
// loss_fn must rebuild the loss from the current input values on the tape it
// is given.
double gradcheck(const std::function<Tensor(Tape&)>& loss_fn, std::span<Tensor> inputs, double step = 1e-5);

// Same measure restricted to at most max_per_input coordinates of each
// input: every coordinate of small inputs, otherwise a seeded sample that
// favours coordinates with a nonzero analytic gradient. One result per
// input, in order.
std::vector<InputCheck> gradcheck_sampled(const std::function<Tensor(Tape&)>& loss_fn, std::span<Tensor> inputs,
                                          std::size_t max_per_input, std::uint64_t seed, double step = 1e-5);

// Random-input check of every differentiable op for one seed.
std::vector<GradcheckReport> gradcheck_ops(std::uint64_t seed, double tolerance = 1e-4);

}  // namespace tqa
