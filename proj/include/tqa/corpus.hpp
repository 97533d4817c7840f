#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace tqa {

using Tokens = std::vector<std::string>;

struct DepNode {
  int index = 0;
  std::string token;
  bool operator==(const DepNode&) const = default;
};

struct DepEdge {
  int head = 0;
  int dependent = 0;
  std::string relation;
  bool operator==(const DepEdge&) const = default;
};

// One tree per sentence; node i carries paragraph token i.
struct DependencyTree {
  std::vector<DepNode> nodes;
  std::vector<DepEdge> edges;
  bool operator==(const DependencyTree&) const = default;
};

struct Paragraph {
  std::string id;
  Tokens tokens;
  DependencyTree dep_tree;
  bool operator==(const Paragraph&) const = default;
};

struct DiagramEntity {
  int index = 0;
  Tokens name_tokens;
  bool operator==(const DiagramEntity&) const = default;
};

struct DiagramGraph {
  std::string id;
  std::vector<DiagramEntity> entities;
  std::vector<std::pair<int, int>> relations;
  int entity_count = 0;
  bool operator==(const DiagramGraph&) const = default;
};

enum class QuestionKind { TrueFalse, TextMC, Diagram };

std::string to_string(QuestionKind kind);
std::optional<QuestionKind> parse_question_kind(std::string_view name);

struct Candidate {
  Tokens tokens;
  bool operator==(const Candidate&) const = default;
};

inline constexpr std::size_t kMinCandidates = 2;
inline constexpr std::size_t kMaxCandidates = 7;

struct Question {
  std::string id;
  QuestionKind kind = QuestionKind::TextMC;
  Tokens tokens;
  std::optional<DiagramGraph> question_diagram;
  std::vector<Candidate> candidates;
  int answer_index = 0;
  bool operator==(const Question&) const = default;
};

struct Lesson {
  std::string id;
  std::vector<Paragraph> paragraphs;
  std::vector<DiagramGraph> diagrams;
  std::vector<Question> questions;
  bool operator==(const Lesson&) const = default;
};

enum class Split { Train, Val, TrainVal, All };

std::optional<Split> parse_split(std::string_view name);

struct Manifest {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::map<std::string, int> counts;
  bool operator==(const Manifest&) const = default;
};

struct QuestionRef {
  const Lesson* lesson = nullptr;
  const Question* question = nullptr;
};

struct Corpus {
  std::vector<Lesson> lessons;
  Manifest manifest;

  bool operator==(const Corpus&) const = default;

  const Lesson* find_lesson(std::string_view id) const;
  std::optional<QuestionRef> find_question(std::string_view id) const;
  // Lessons of a split in corpus order.
  std::vector<const Lesson*> lessons_in(Split split) const;
  std::vector<QuestionRef> questions_in(Split split) const;
  // {"lessons", "questions", "TrueFalse", "TextMC", "Diagram"} over all lessons.
  std::map<std::string, int> computed_counts() const;
};

// JSON mapping for the on-disk schema. The from_json side validates types
// and reports the offending JSON pointer; invariant checks live in
// validate_lesson.
nlohmann::json lesson_to_json(const Lesson& lesson);
Lesson lesson_from_json(const nlohmann::json& j, const std::string& file);
nlohmann::json diagram_to_json(const DiagramGraph& dg);
nlohmann::json manifest_to_json(const Manifest& manifest);
Manifest manifest_from_json(const nlohmann::json& j, const std::string& file);

void validate_lesson(const Lesson& lesson);
void validate_corpus(const Corpus& corpus);

// Reads <dir>/lessons/*.json (sorted by file name) and <dir>/manifest.json.
Corpus load_corpus(const std::filesystem::path& dir);
// Writes one <lesson id>.json per lesson plus manifest.json.
void save_corpus(const Corpus& corpus, const std::filesystem::path& dir);
// Deterministic textual serialization of a whole corpus.
std::string serialize_corpus(const Corpus& corpus);

}  // namespace tqa
