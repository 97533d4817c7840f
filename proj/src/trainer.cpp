#include "tqa/trainer.hpp"

#include <numeric>

#include "tqa/errors.hpp"
#include "tqa/rng.hpp"

namespace tqa {

EpochStats train_epoch(Model& model, const std::vector<Episode>& episodes, AdamState& state, std::size_t batch_size,
                       std::uint64_t seed, std::size_t epoch) {
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  EpochStats stats;
  if (episodes.empty()) return stats;
  std::vector<std::size_t> order(episodes.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, 0x7261696eULL, epoch));
  shuffle(order, rng);

  auto params = model.parameters();
  double total = 0.0;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const auto end = std::min(order.size(), start + batch_size);
    const double weight = 1.0 / static_cast<double>(end - start);
    model.zero_grad();
    for (std::size_t b = start; b < end; ++b) {
      const auto& episode = episodes[order[b]];
      Tape tape;
      ForwardContext ctx;
      ctx.train = true;
      ctx.seed = derive_seed(seed, epoch, order[b]);
      auto loss = ops::cross_entropy(tape, model.forward(tape, episode, ctx), episode.label);
      total += loss.item();
      auto scaled = ops::scale(tape, loss, weight);
      tape.backward(scaled);
    }
    adam_step(params, state);
  }
  stats.episodes = episodes.size();
  stats.mean_loss = total / static_cast<double>(episodes.size());
  return stats;
}

std::size_t argmax(const std::vector<double>& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

double mean_loss(const Model& model, const std::vector<Episode>& episodes) {
  if (episodes.empty()) return 0.0;
  double total = 0.0;
  for (const auto& e : episodes) {
    Tape tape;
    ForwardContext ctx;
    total += ops::cross_entropy(tape, model.forward(tape, e, ctx), e.label).item();
  }
  return total / static_cast<double>(episodes.size());
}

}  // namespace tqa
