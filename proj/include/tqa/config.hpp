#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "tqa/corpus.hpp"
#include "tqa/model.hpp"

namespace tqa {

struct TrainConfig {
  double lr = 0.001;
  double lr_decay = 0.9;
  std::size_t epochs = 10;
  std::size_t batch_size = 1;
  std::uint64_t seed = 0;
  // Stop after this many epochs without a better val Text All; 0 disables.
  std::size_t patience = 0;
  std::string embeddings;
  std::string ssoc_checkpoint;
  std::size_t ssoc_epochs = 30;
  Split ssoc_split = Split::TrainVal;
  int min_j = 2;
  bool ssoc_shuffle_contexts = true;
};

struct RunConfig {
  ModelConfig model;
  TrainConfig train;
};

// "key = value" lines; '#' starts a comment. Keys mirror the field names of
// ModelConfig and TrainConfig. Throws ConfigError on unknown keys or bad
// values, naming the line.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
// Canonical text form; parse_config(format_config(c)) reproduces c.
std::string format_config(const RunConfig& config);
// TQA_SEED, when set, replaces train.seed.
void apply_environment(RunConfig& config);
// Small dimensions for single-core runs; graph caps, keep rate and the
// optimizer settings keep their defaults.
ModelConfig desk_model_config();

}  // namespace tqa
