#include "tqa/embeddings.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "tqa/errors.hpp"
#include "tqa/rng.hpp"

namespace tqa {

EmbeddingTable::EmbeddingTable(std::size_t dim, OovPolicy policy, std::uint64_t seed)
    : dim_(dim), policy_(policy), seed_(seed) {}

void EmbeddingTable::insert(const std::string& token, std::vector<double> vector) {
  if (vector.size() != dim_)
    throw DimMismatch("vector for '" + token + "' has " + std::to_string(vector.size()) + " values, expected " +
                      std::to_string(dim_));
  entries_[token] = std::move(vector);
}

std::vector<double> EmbeddingTable::lookup(const std::string& token) const {
  if (auto it = entries_.find(token); it != entries_.end()) return it->second;
  std::vector<double> out(dim_, 0.0);
  if (policy_ == OovPolicy::RandomInit) {
    Rng rng(derive_seed(seed_, token));
    for (auto& v : out) v = uniform(rng, -0.1, 0.1);
  }
  return out;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path, std::size_t dim, std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read embeddings " + path.string());
  EmbeddingTable table(dim, OovPolicy::RandomInit, seed);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token)) continue;
    std::vector<double> values;
    std::string field;
    while (fields >> field) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(field, &used));
        if (used != field.size()) throw std::invalid_argument(field);
      } catch (const std::exception&) {
        throw DimMismatch(path.string() + ":" + std::to_string(line_no) + ": non-numeric value '" + field + "'");
      }
    }
    if (values.size() != dim)
      throw DimMismatch(path.string() + ":" + std::to_string(line_no) + ": " + std::to_string(values.size()) +
                        " values, expected " + std::to_string(dim));
    table.insert(token, std::move(values));
  }
  if (in.bad()) throw IoError("error reading " + path.string());
  return table;
}

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>{}) {}

Vocabulary::Vocabulary(std::vector<std::string> tokens) {
  tokens_.push_back(kUnknown);
  for (auto& t : tokens)
    if (t != kUnknown) tokens_.push_back(std::move(t));
  for (std::size_t i = 0; i < tokens_.size(); ++i) index_.emplace(tokens_[i], i);
}

Vocabulary Vocabulary::from_corpus(const Corpus& corpus) {
  std::set<std::string> seen{"there", "are", "objects", "stages"};
  auto add = [&](const Tokens& ts) { seen.insert(ts.begin(), ts.end()); };
  auto add_diagram = [&](const DiagramGraph& dg) {
    for (const auto& e : dg.entities) add(e.name_tokens);
    seen.insert(std::to_string(dg.entity_count));
  };
  for (const auto& l : corpus.lessons) {
    for (const auto& p : l.paragraphs) add(p.tokens);
    for (const auto& dg : l.diagrams) add_diagram(dg);
    for (const auto& q : l.questions) {
      add(q.tokens);
      for (const auto& c : q.candidates) add(c.tokens);
      if (q.question_diagram) add_diagram(*q.question_diagram);
    }
  }
  return Vocabulary(std::vector<std::string>(seen.begin(), seen.end()));
}

std::size_t Vocabulary::index(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? 0 : it->second;
}

}  // namespace tqa
