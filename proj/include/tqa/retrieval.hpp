#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tqa/corpus.hpp"

namespace tqa {

struct RankedParagraph {
  std::string paragraph_id;
  std::size_t position = 0;
  double score = 0.0;
};

// Per-lesson tf-idf index over raw token counts. Weights are tf * idf with
// the smoothed idf ln((1 + N) / (1 + df)) + 1; tokens the index has never
// seen get ln(1 + N) + 1. Scores are cosine similarities.
class TfidfIndex {
 public:
  struct Doc {
    std::string paragraph_id;
    std::map<std::string, int> tf;
  };

  // Throws EmptyInput when there are no paragraphs.
  static TfidfIndex build(std::span<const Paragraph> paragraphs);

  int doc_count() const { return static_cast<int>(docs_.size()); }
  const std::map<std::string, int>& df() const { return df_; }
  const std::vector<Doc>& docs() const { return docs_; }

  double idf(const std::string& token) const;
  // Throws UnknownParagraph.
  double score(const Tokens& query, std::string_view paragraph_id) const;
  double score_at(const Tokens& query, std::size_t position) const;
  // Highest scores first, ties by paragraph position; j is clamped to the
  // paragraph count. Throws SpecError when j < 1.
  std::vector<RankedParagraph> top_j(const Tokens& query, int j) const;

 private:
  std::map<std::string, double> weights(const std::map<std::string, int>& tf) const;

  std::vector<Doc> docs_;
  std::map<std::string, int> df_;
  std::vector<double> norms_;
};

// [question ; candidate] concatenation used as the retrieval query.
Tokens retrieval_query(const Tokens& question, const Tokens& candidate);

}  // namespace tqa
