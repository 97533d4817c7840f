#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include "tqa/corpus.hpp"

namespace tqa::testing {

inline std::filesystem::path mini_dir() { return std::filesystem::path(TQA_SOURCE_DIR) / "fixtures" / "mini"; }

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("tqa_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Chain tree over tokens with one edge per listed (head, dependent) pair.
inline DependencyTree make_tree(const Tokens& tokens, const std::vector<std::pair<int, int>>& edges) {
  DependencyTree t;
  for (std::size_t i = 0; i < tokens.size(); ++i) t.nodes.push_back({static_cast<int>(i), tokens[i]});
  for (auto [h, d] : edges) t.edges.push_back({h, d, "dep"});
  return t;
}

inline Paragraph make_paragraph(const std::string& id, const Tokens& tokens) {
  std::vector<std::pair<int, int>> edges;
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) edges.push_back({static_cast<int>(i + 1), static_cast<int>(i)});
  return {id, tokens, make_tree(tokens, edges)};
}

}  // namespace tqa::testing
