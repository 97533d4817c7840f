#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "tqa/corpus.hpp"

namespace tqa {

enum class OovPolicy { RandomInit, Zero };

// Word vectors keyed by token. Absent tokens resolve through the OOV policy:
// RandomInit draws one vector per token from uniform(-0.1, 0.1) with a
// generator seeded by (seed, token), so lookups are pure.
class EmbeddingTable {
 public:
  EmbeddingTable(std::size_t dim, OovPolicy policy, std::uint64_t seed);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }
  bool contains(const std::string& token) const { return entries_.count(token) != 0; }
  OovPolicy policy() const { return policy_; }

  void insert(const std::string& token, std::vector<double> vector);
  std::vector<double> lookup(const std::string& token) const;

 private:
  std::size_t dim_;
  OovPolicy policy_;
  std::uint64_t seed_;
  std::unordered_map<std::string, std::vector<double>> entries_;
};

// GloVe text format, one "token v1 ... vdim" per line. Blank lines are
// skipped. Throws DimMismatch naming the line, IoError if unreadable.
EmbeddingTable load_embeddings(const std::filesystem::path& path, std::size_t dim, std::uint64_t seed);

// Token inventory for the word table. Row 0 is "<unk>"; the rest are the
// sorted unique tokens of the corpus (paragraphs, questions, candidates,
// diagram entity names) plus the count-sentence words.
class Vocabulary {
 public:
  static constexpr const char* kUnknown = "<unk>";

  Vocabulary();
  explicit Vocabulary(std::vector<std::string> tokens);

  static Vocabulary from_corpus(const Corpus& corpus);

  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::string& token(std::size_t index) const { return tokens_.at(index); }
  // Index of the token, or of "<unk>".
  std::size_t index(const std::string& token) const;
  bool contains(const std::string& token) const { return index_.count(token) != 0; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace tqa
