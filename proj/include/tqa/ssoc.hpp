#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tqa/adam.hpp"
#include "tqa/corpus.hpp"
#include "tqa/episode.hpp"
#include "tqa/model.hpp"

namespace tqa {

// Context-ranking task for (question, candidate k): contexts in descending
// tf-idf order for [q ; A_k], so the label is always position 0.
struct SsocTask {
  std::string lesson_id;
  std::string question_id;
  std::size_t candidate_index = 0;
  int j = 0;
  std::vector<std::string> contexts;
  std::vector<double> scores;
  std::size_t label = 0;
  bool operator==(const SsocTask&) const = default;
};

inline constexpr int kSsocMinJ = 2;
inline constexpr int kSsocMaxJ = 7;

// One task per candidate of every question in the split, j drawn uniformly
// from [2, 7] with seed (seed, question id, k) and clamped to the lesson's
// paragraph count. Tasks come out in a seeded shuffled order. Answer
// indices are never read.
std::vector<SsocTask> generate_ssoc_tasks(const Corpus& corpus, Split split, std::uint64_t seed);

nlohmann::json ssoc_task_to_json(const SsocTask& task);

// Order in which the contexts of a task are shown to the model. The
// identity when shuffle is false, otherwise a permutation seeded by the
// task, so the model cannot read the label off the position.
std::vector<std::size_t> ssoc_presentation_order(const SsocTask& task, std::uint64_t seed, bool shuffle);

// Text-only episode over the task's contexts in the given presentation
// order; the label follows the top-ranked context.
Episode prepare_ssoc_episode(const Corpus& corpus, const SsocTask& task, const ModelConfig& config,
                             const std::vector<std::size_t>& order);

std::vector<double> ssoc_forward(const Model& model, const Episode& episode);

struct SsocConfig {
  std::size_t epochs = 30;
  int min_j = kSsocMinJ;
  double lr = 0.001;
  double lr_decay = 0.9;
  std::size_t batch_size = 1;
  std::uint64_t seed = 0;
  bool shuffle_contexts = true;
};

struct SsocEpochMetrics {
  std::size_t epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double accuracy = 0.0;
  std::size_t tasks = 0;
};

// Episodes for the tasks with j >= min_j.
std::vector<Episode> ssoc_episodes(const Corpus& corpus, const std::vector<SsocTask>& tasks,
                                   const ModelConfig& config, int min_j, std::uint64_t seed, bool shuffle);

// Fraction of episodes whose argmax is the label.
double episode_accuracy(const Model& model, const std::vector<Episode>& episodes);

using SsocEpochCallback = std::function<void(const SsocEpochMetrics&, const AdamState&)>;

// Cross-entropy pretraining over the tasks; parameters change in place.
std::vector<SsocEpochMetrics> pretrain_ssoc(Model& model, const Corpus& corpus, const std::vector<SsocTask>& tasks,
                                            const SsocConfig& config, AdamState& state,
                                            const SsocEpochCallback& on_epoch = {});

}  // namespace tqa
