#include "tqa/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "tqa/errors.hpp"

namespace tqa {

using nlohmann::json;

std::string to_string(QuestionKind kind) {
  switch (kind) {
    case QuestionKind::TrueFalse:
      return "TrueFalse";
    case QuestionKind::TextMC:
      return "TextMC";
    case QuestionKind::Diagram:
      return "Diagram";
  }
  return "TextMC";
}

std::optional<QuestionKind> parse_question_kind(std::string_view name) {
  if (name == "TrueFalse") return QuestionKind::TrueFalse;
  if (name == "TextMC") return QuestionKind::TextMC;
  if (name == "Diagram") return QuestionKind::Diagram;
  return std::nullopt;
}

std::optional<Split> parse_split(std::string_view name) {
  if (name == "train") return Split::Train;
  if (name == "val") return Split::Val;
  if (name == "train+val") return Split::TrainVal;
  if (name == "all") return Split::All;
  return std::nullopt;
}

const Lesson* Corpus::find_lesson(std::string_view id) const {
  for (const auto& l : lessons)
    if (l.id == id) return &l;
  return nullptr;
}

std::optional<QuestionRef> Corpus::find_question(std::string_view id) const {
  for (const auto& l : lessons)
    for (const auto& q : l.questions)
      if (q.id == id) return QuestionRef{&l, &q};
  return std::nullopt;
}

std::vector<const Lesson*> Corpus::lessons_in(Split split) const {
  auto listed = [](const std::vector<std::string>& ids, const std::string& id) {
    return std::find(ids.begin(), ids.end(), id) != ids.end();
  };
  std::vector<const Lesson*> out;
  for (const auto& l : lessons) {
    const bool train = listed(manifest.train, l.id);
    const bool val = listed(manifest.val, l.id);
    const bool keep = split == Split::All || (split == Split::Train && train) || (split == Split::Val && val) ||
                      (split == Split::TrainVal && (train || val));
    if (keep) out.push_back(&l);
  }
  return out;
}

std::vector<QuestionRef> Corpus::questions_in(Split split) const {
  std::vector<QuestionRef> out;
  for (const auto* l : lessons_in(split))
    for (const auto& q : l->questions) out.push_back({l, &q});
  return out;
}

std::map<std::string, int> Corpus::computed_counts() const {
  std::map<std::string, int> counts{{"lessons", static_cast<int>(lessons.size())},
                                    {"questions", 0},
                                    {"TrueFalse", 0},
                                    {"TextMC", 0},
                                    {"Diagram", 0}};
  for (const auto& l : lessons) {
    for (const auto& q : l.questions) {
      ++counts["questions"];
      ++counts[to_string(q.kind)];
    }
  }
  return counts;
}

namespace {

// Typed accessors that report "<file>: <json pointer>: <problem>".
class Reader {
 public:
  explicit Reader(std::string file) : file_(std::move(file)) {}

  [[noreturn]] void fail(const std::string& ptr, const std::string& what) const {
    throw SchemaError(file_ + ": " + (ptr.empty() ? "/" : ptr) + ": " + what);
  }

  const json& member(const json& obj, const std::string& ptr, const char* key) const {
    if (!obj.is_object()) fail(ptr, "expected object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(ptr + "/" + key, "missing field");
    return *it;
  }

  const json& array(const json& obj, const std::string& ptr, const char* key) const {
    const auto& v = member(obj, ptr, key);
    if (!v.is_array()) fail(ptr + "/" + key, "expected array");
    return v;
  }

  std::string string(const json& v, const std::string& ptr) const {
    if (!v.is_string()) fail(ptr, "expected string");
    return v.get<std::string>();
  }

  int integer(const json& v, const std::string& ptr) const {
    if (!v.is_number_integer()) fail(ptr, "expected integer");
    return v.get<int>();
  }

  Tokens tokens(const json& v, const std::string& ptr) const {
    if (!v.is_array()) fail(ptr, "expected array of strings");
    Tokens out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(string(v[i], ptr + "/" + std::to_string(i)));
    return out;
  }

  DiagramGraph diagram(const json& j, const std::string& ptr) const {
    DiagramGraph dg;
    dg.id = string(member(j, ptr, "id"), ptr + "/id");
    const auto& entities = array(j, ptr, "entities");
    for (std::size_t i = 0; i < entities.size(); ++i) {
      const auto p = ptr + "/entities/" + std::to_string(i);
      dg.entities.push_back(
          {integer(member(entities[i], p, "index"), p + "/index"), tokens(member(entities[i], p, "name_tokens"), p + "/name_tokens")});
    }
    const auto& relations = array(j, ptr, "relations");
    for (std::size_t i = 0; i < relations.size(); ++i) {
      const auto p = ptr + "/relations/" + std::to_string(i);
      if (!relations[i].is_array() || relations[i].size() != 2) fail(p, "expected [a, b]");
      dg.relations.emplace_back(integer(relations[i][0], p + "/0"), integer(relations[i][1], p + "/1"));
    }
    dg.entity_count = integer(member(j, ptr, "entity_count"), ptr + "/entity_count");
    return dg;
  }

 private:
  std::string file_;
};

json tokens_json(const Tokens& tokens) { return json(tokens); }

[[noreturn]] void invariant(const std::string& where, const std::string& what) {
  throw InvariantError(where + ": " + what);
}

void validate_diagram(const DiagramGraph& dg, const std::string& where) {
  if (dg.entity_count != static_cast<int>(dg.entities.size()))
    invariant(where, "entity_count " + std::to_string(dg.entity_count) + " != " + std::to_string(dg.entities.size()) +
                         " entities");
  for (std::size_t i = 0; i < dg.entities.size(); ++i) {
    if (dg.entities[i].index != static_cast<int>(i)) invariant(where, "entity " + std::to_string(i) + " has index " + std::to_string(dg.entities[i].index));
    if (dg.entities[i].name_tokens.empty()) invariant(where, "entity " + std::to_string(i) + " has an empty name");
  }
  for (const auto& [a, b] : dg.relations) {
    if (a < 0 || b < 0 || a >= dg.entity_count || b >= dg.entity_count)
      invariant(where, "relation endpoint out of range (" + std::to_string(a) + ", " + std::to_string(b) + ")");
  }
}

void validate_tree(const Paragraph& p, const std::string& where) {
  const auto& tree = p.dep_tree;
  if (tree.nodes.size() != p.tokens.size())
    invariant(where, "dependency tree has " + std::to_string(tree.nodes.size()) + " nodes for " +
                         std::to_string(p.tokens.size()) + " tokens");
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    if (tree.nodes[i].index != static_cast<int>(i)) invariant(where, "node " + std::to_string(i) + " has index " + std::to_string(tree.nodes[i].index));
    if (tree.nodes[i].token != p.tokens[i]) invariant(where, "node " + std::to_string(i) + " token differs from paragraph token");
  }
  const int n = static_cast<int>(tree.nodes.size());
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
    return x;
  };
  std::vector<bool> has_head(static_cast<std::size_t>(n), false);
  for (const auto& e : tree.edges) {
    if (e.head < 0 || e.head >= n || e.dependent < 0 || e.dependent >= n)
      invariant(where, "edge (" + std::to_string(e.head) + ", " + std::to_string(e.dependent) + ") out of range");
    if (e.relation.empty()) invariant(where, "edge with empty relation");
    if (has_head[static_cast<std::size_t>(e.dependent)]) invariant(where, "node " + std::to_string(e.dependent) + " has two heads");
    has_head[static_cast<std::size_t>(e.dependent)] = true;
    const int a = find(e.head), b = find(e.dependent);
    if (a == b) invariant(where, "dependency edges contain a cycle");
    parent[static_cast<std::size_t>(a)] = b;
  }
}

}  // namespace

void validate_lesson(const Lesson& lesson) {
  const auto where = "lesson " + lesson.id;
  if (lesson.paragraphs.empty()) invariant(where, "no paragraphs");
  std::set<std::string> ids;
  for (const auto& p : lesson.paragraphs) {
    if (!ids.insert(p.id).second) invariant(where, "duplicate paragraph id " + p.id);
    if (p.tokens.empty()) invariant("paragraph " + p.id, "no tokens");
    validate_tree(p, "paragraph " + p.id);
  }
  for (const auto& dg : lesson.diagrams) validate_diagram(dg, "diagram " + dg.id);
  for (const auto& q : lesson.questions) {
    const auto qw = "question " + q.id;
    const auto n = q.candidates.size();
    if (q.tokens.empty()) invariant(qw, "no question tokens");
    if (n < kMinCandidates || n > kMaxCandidates) invariant(qw, std::to_string(n) + " candidates, expected 2..7");
    if (q.kind == QuestionKind::TrueFalse && n != 2) invariant(qw, "true/false question needs exactly 2 candidates");
    if (q.answer_index < 0 || q.answer_index >= static_cast<int>(n))
      invariant(qw, "answer_index " + std::to_string(q.answer_index) + " out of range for " + std::to_string(n) + " candidates");
    for (const auto& c : q.candidates)
      if (c.tokens.empty()) invariant(qw, "empty candidate");
    if (q.question_diagram) validate_diagram(*q.question_diagram, qw + " diagram");
  }
}

void validate_corpus(const Corpus& corpus) {
  std::set<std::string> lesson_ids, question_ids;
  for (const auto& l : corpus.lessons) {
    if (!lesson_ids.insert(l.id).second) invariant("corpus", "duplicate lesson id " + l.id);
    validate_lesson(l);
    for (const auto& q : l.questions)
      if (!question_ids.insert(q.id).second) invariant("corpus", "duplicate question id " + q.id);
  }
  for (const auto* ids : {&corpus.manifest.train, &corpus.manifest.val})
    for (const auto& id : *ids)
      if (!lesson_ids.count(id)) invariant("manifest", "split names unknown lesson " + id);
}

json diagram_to_json(const DiagramGraph& dg) {
  json entities = json::array();
  for (const auto& e : dg.entities) entities.push_back({{"index", e.index}, {"name_tokens", tokens_json(e.name_tokens)}});
  json relations = json::array();
  for (const auto& [a, b] : dg.relations) relations.push_back({a, b});
  return {{"id", dg.id}, {"entities", entities}, {"relations", relations}, {"entity_count", dg.entity_count}};
}

json lesson_to_json(const Lesson& lesson) {
  json paragraphs = json::array();
  for (const auto& p : lesson.paragraphs) {
    json nodes = json::array(), edges = json::array();
    for (const auto& n : p.dep_tree.nodes) nodes.push_back({{"index", n.index}, {"token", n.token}});
    for (const auto& e : p.dep_tree.edges) edges.push_back({e.head, e.dependent, e.relation});
    paragraphs.push_back({{"id", p.id}, {"tokens", tokens_json(p.tokens)}, {"dep_tree", {{"nodes", nodes}, {"edges", edges}}}});
  }
  json diagrams = json::array();
  for (const auto& dg : lesson.diagrams) diagrams.push_back(diagram_to_json(dg));
  json questions = json::array();
  for (const auto& q : lesson.questions) {
    json candidates = json::array();
    for (const auto& c : q.candidates) candidates.push_back({{"tokens", tokens_json(c.tokens)}});
    questions.push_back({{"id", q.id},
                         {"kind", to_string(q.kind)},
                         {"tokens", tokens_json(q.tokens)},
                         {"question_diagram", q.question_diagram ? diagram_to_json(*q.question_diagram) : json(nullptr)},
                         {"candidates", candidates},
                         {"answer_index", q.answer_index}});
  }
  return {{"id", lesson.id}, {"paragraphs", paragraphs}, {"diagrams", diagrams}, {"questions", questions}};
}

Lesson lesson_from_json(const json& j, const std::string& file) {
  Reader r(file);
  Lesson lesson;
  lesson.id = r.string(r.member(j, "", "id"), "/id");
  const auto& paragraphs = r.array(j, "", "paragraphs");
  for (std::size_t i = 0; i < paragraphs.size(); ++i) {
    const auto ptr = "/paragraphs/" + std::to_string(i);
    const auto& pj = paragraphs[i];
    Paragraph p;
    p.id = r.string(r.member(pj, ptr, "id"), ptr + "/id");
    p.tokens = r.tokens(r.member(pj, ptr, "tokens"), ptr + "/tokens");
    const auto tptr = ptr + "/dep_tree";
    const auto& tj = r.member(pj, ptr, "dep_tree");
    const auto& nodes = r.array(tj, tptr, "nodes");
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const auto np = tptr + "/nodes/" + std::to_string(k);
      p.dep_tree.nodes.push_back({r.integer(r.member(nodes[k], np, "index"), np + "/index"),
                                  r.string(r.member(nodes[k], np, "token"), np + "/token")});
    }
    const auto& edges = r.array(tj, tptr, "edges");
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const auto ep = tptr + "/edges/" + std::to_string(k);
      if (!edges[k].is_array() || edges[k].size() != 3) r.fail(ep, "expected [head, dependent, relation]");
      p.dep_tree.edges.push_back({r.integer(edges[k][0], ep + "/0"), r.integer(edges[k][1], ep + "/1"),
                                  r.string(edges[k][2], ep + "/2")});
    }
    lesson.paragraphs.push_back(std::move(p));
  }
  const auto& diagrams = r.array(j, "", "diagrams");
  for (std::size_t i = 0; i < diagrams.size(); ++i)
    lesson.diagrams.push_back(r.diagram(diagrams[i], "/diagrams/" + std::to_string(i)));
  const auto& questions = r.array(j, "", "questions");
  for (std::size_t i = 0; i < questions.size(); ++i) {
    const auto ptr = "/questions/" + std::to_string(i);
    const auto& qj = questions[i];
    Question q;
    q.id = r.string(r.member(qj, ptr, "id"), ptr + "/id");
    const auto kind = r.string(r.member(qj, ptr, "kind"), ptr + "/kind");
    const auto parsed = parse_question_kind(kind);
    if (!parsed) r.fail(ptr + "/kind", "unknown question kind '" + kind + "'");
    q.kind = *parsed;
    q.tokens = r.tokens(r.member(qj, ptr, "tokens"), ptr + "/tokens");
    if (auto it = qj.find("question_diagram"); it != qj.end() && !it->is_null())
      q.question_diagram = r.diagram(*it, ptr + "/question_diagram");
    const auto& candidates = r.array(qj, ptr, "candidates");
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      const auto cp = ptr + "/candidates/" + std::to_string(k);
      q.candidates.push_back({r.tokens(r.member(candidates[k], cp, "tokens"), cp + "/tokens")});
    }
    q.answer_index = r.integer(r.member(qj, ptr, "answer_index"), ptr + "/answer_index");
    lesson.questions.push_back(std::move(q));
  }
  return lesson;
}

json manifest_to_json(const Manifest& manifest) {
  return {{"splits", {{"train", manifest.train}, {"val", manifest.val}}}, {"counts", manifest.counts}};
}

Manifest manifest_from_json(const json& j, const std::string& file) {
  Reader r(file);
  Manifest m;
  const auto& splits = r.member(j, "", "splits");
  for (auto [key, dst] : {std::pair{"train", &m.train}, std::pair{"val", &m.val}}) {
    const auto& ids = r.array(splits, "/splits", key);
    *dst = r.tokens(ids, std::string("/splits/") + key);
  }
  if (auto it = j.find("counts"); it != j.end()) {
    if (!it->is_object()) r.fail("/counts", "expected object");
    for (const auto& [key, value] : it->items()) m.counts[key] = r.integer(value, "/counts/" + key);
  }
  return m;
}

namespace {

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(path.string() + ": /: invalid JSON (" + e.what() + ")");
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

}  // namespace

Corpus load_corpus(const std::filesystem::path& dir) {
  const auto lessons_dir = dir / "lessons";
  if (!std::filesystem::is_directory(lessons_dir)) throw IoError("missing lessons directory " + lessons_dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(lessons_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  Corpus corpus;
  for (const auto& f : files) corpus.lessons.push_back(lesson_from_json(read_json_file(f), f.string()));
  const auto manifest_path = dir / "manifest.json";
  corpus.manifest = manifest_from_json(read_json_file(manifest_path), manifest_path.string());
  validate_corpus(corpus);
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "lessons");
  for (const auto& l : corpus.lessons) write_text(dir / "lessons" / (l.id + ".json"), lesson_to_json(l).dump(1) + "\n");
  write_text(dir / "manifest.json", manifest_to_json(corpus.manifest).dump(1) + "\n");
}

std::string serialize_corpus(const Corpus& corpus) {
  json lessons = json::array();
  for (const auto& l : corpus.lessons) lessons.push_back(lesson_to_json(l));
  return json{{"lessons", lessons}, {"manifest", manifest_to_json(corpus.manifest)}}.dump();
}

}  // namespace tqa
