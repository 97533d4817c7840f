#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tqa/adam.hpp"
#include "tqa/tensor.hpp"

namespace tqa {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// On-disk layout (all integers and reals little-endian):
//   "TQACKPT\0" | u32 version
//   u32 n + bytes                      model configuration (key = value text)
//   u32 count, {u32 n + bytes}*        word vocabulary, row order of word_emb
//   u32 count, {u32 n + name, u32 rank, u64 dims[rank], f64 data[]}*
//   u8 has_optimizer, then when 1:
//     u64 step, f64 lr, beta1, beta2, eps, u32 count, {u64 n, f64 m[n], f64 v[n]}*
struct Checkpoint {
  std::string config_text;
  std::vector<std::string> vocabulary;
  std::vector<std::pair<std::string, Tensor>> params;
  std::optional<AdamState> optimizer;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace tqa
