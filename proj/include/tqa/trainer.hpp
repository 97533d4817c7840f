#pragma once

#include <cstdint>
#include <vector>

#include "tqa/adam.hpp"
#include "tqa/model.hpp"

namespace tqa {

struct EpochStats {
  double mean_loss = 0.0;
  std::size_t episodes = 0;
};

// One pass of cross-entropy training in a seeded order. Gradients are
// averaged over each batch before the Adam step; the caller owns the
// learning rate in `state`.
EpochStats train_epoch(Model& model, const std::vector<Episode>& episodes, AdamState& state, std::size_t batch_size,
                       std::uint64_t seed, std::size_t epoch);

// Index of the largest value; ties go to the lowest index.
std::size_t argmax(const std::vector<double>& values);

// Mean cross-entropy in evaluation mode.
double mean_loss(const Model& model, const std::vector<Episode>& episodes);

}  // namespace tqa
