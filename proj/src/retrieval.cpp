#include "tqa/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tqa/errors.hpp"

namespace tqa {

namespace {

std::map<std::string, int> term_counts(const Tokens& tokens) {
  std::map<std::string, int> tf;
  for (const auto& t : tokens) ++tf[t];
  return tf;
}

double norm(const std::map<std::string, double>& w) {
  double s = 0.0;
  for (const auto& [_, v] : w) s += v * v;
  return std::sqrt(s);
}

}  // namespace

TfidfIndex TfidfIndex::build(std::span<const Paragraph> paragraphs) {
  if (paragraphs.empty()) throw EmptyInput("tf-idf index needs at least one paragraph");
  TfidfIndex index;
  for (const auto& p : paragraphs) {
    index.docs_.push_back({p.id, term_counts(p.tokens)});
    for (const auto& [t, _] : index.docs_.back().tf) ++index.df_[t];
  }
  for (const auto& d : index.docs_) index.norms_.push_back(norm(index.weights(d.tf)));
  return index;
}

double TfidfIndex::idf(const std::string& token) const {
  const double n = static_cast<double>(docs_.size());
  auto it = df_.find(token);
  if (it == df_.end()) return std::log(1.0 + n) + 1.0;
  return std::log((1.0 + n) / (1.0 + it->second)) + 1.0;
}

std::map<std::string, double> TfidfIndex::weights(const std::map<std::string, int>& tf) const {
  std::map<std::string, double> w;
  for (const auto& [t, c] : tf) w.emplace(t, c * idf(t));
  return w;
}

double TfidfIndex::score_at(const Tokens& query, std::size_t position) const {
  const auto& doc = docs_.at(position);
  const auto q = weights(term_counts(query));
  const double qn = norm(q);
  const double dn = norms_[position];
  if (qn == 0.0 || dn == 0.0) return 0.0;
  double dot = 0.0;
  for (const auto& [t, w] : q) {
    auto it = doc.tf.find(t);
    if (it != doc.tf.end()) dot += w * it->second * idf(t);
  }
  return std::clamp(dot / (qn * dn), 0.0, 1.0);
}

double TfidfIndex::score(const Tokens& query, std::string_view paragraph_id) const {
  for (std::size_t i = 0; i < docs_.size(); ++i)
    if (docs_[i].paragraph_id == paragraph_id) return score_at(query, i);
  throw UnknownParagraph("paragraph '" + std::string(paragraph_id) + "' is not in the index");
}

std::vector<RankedParagraph> TfidfIndex::top_j(const Tokens& query, int j) const {
  if (j < 1) throw SpecError("top_j needs j >= 1, got " + std::to_string(j));
  std::vector<RankedParagraph> ranked;
  for (std::size_t i = 0; i < docs_.size(); ++i) ranked.push_back({docs_[i].paragraph_id, i, score_at(query, i)});
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const RankedParagraph& a, const RankedParagraph& b) { return a.score > b.score; });
  ranked.resize(std::min(ranked.size(), static_cast<std::size_t>(j)));
  return ranked;
}

Tokens retrieval_query(const Tokens& question, const Tokens& candidate) {
  Tokens q = question;
  q.insert(q.end(), candidate.begin(), candidate.end());
  return q;
}

}  // namespace tqa
