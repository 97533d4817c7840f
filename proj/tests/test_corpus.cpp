#include <gtest/gtest.h>

#include <fstream>
#include <set>

#include "test_support.hpp"
#include "tqa/corpus.hpp"
#include "tqa/embeddings.hpp"
#include "tqa/errors.hpp"
#include "tqa/synth.hpp"

namespace {

using namespace tqa;
using tqa::testing::make_paragraph;
using tqa::testing::mini_dir;
using tqa::testing::scratch_dir;
using nlohmann::json;

Corpus one_lesson_corpus() {
  Lesson l;
  l.id = "solo";
  l.paragraphs = {make_paragraph("solo_p0", {"plants", "need", "light"}),
                  make_paragraph("solo_p1", {"roots", "absorb", "water"})};
  Question q;
  q.id = "solo_q0";
  q.kind = QuestionKind::TrueFalse;
  q.tokens = {"roots", "absorb", "water"};
  q.candidates = {{{"true"}}, {{"false"}}};
  q.answer_index = 0;
  l.questions = {q};
  Corpus c;
  c.lessons = {l};
  c.manifest.train = {"solo"};
  c.manifest.counts = c.computed_counts();
  return c;
}

json read_json(const std::filesystem::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

void write_json(const std::filesystem::path& p, const json& j) {
  std::ofstream out(p, std::ios::trunc);
  out << j.dump(1);
}

std::filesystem::path copy_mini(const std::string& name) {
  auto dir = scratch_dir(name);
  std::filesystem::copy(mini_dir(), dir, std::filesystem::copy_options::recursive);
  return dir;
}

TEST(LoadCorpus, MinimalLesson) {
  const auto dir = scratch_dir("minimal");
  save_corpus(one_lesson_corpus(), dir);
  const auto c = load_corpus(dir);
  ASSERT_EQ(c.lessons.size(), 1u);
  EXPECT_EQ(c.lessons[0].paragraphs.size(), 2u);
  EXPECT_EQ(c.questions_in(Split::All).size(), 1u);
}

TEST(LoadCorpus, MiniFixtureCountsMatchManifest) {
  const auto c = load_corpus(mini_dir());
  EXPECT_EQ(c.lessons.size(), 3u);
  EXPECT_EQ(c.computed_counts(), c.manifest.counts);
  // Counted from the fixture files before the build.
  const std::map<std::string, int> expected = {
      {"lessons", 3}, {"questions", 12}, {"TrueFalse", 4}, {"TextMC", 4}, {"Diagram", 4}};
  EXPECT_EQ(c.computed_counts(), expected);
  EXPECT_EQ(c.questions_in(Split::Train).size(), 8u);
  EXPECT_EQ(c.questions_in(Split::Val).size(), 4u);
  EXPECT_EQ(c.lessons_in(Split::Val).front()->id, "cells");
}

TEST(LoadCorpus, AnswerIndexOutOfRangeNamesQuestion) {
  const auto dir = copy_mini("bad_answer");
  const auto file = dir / "lessons" / "earth_interior.json";
  auto j = read_json(file);
  j["questions"][1]["answer_index"] = 7;
  write_json(file, j);
  try {
    load_corpus(dir);
    FAIL() << "expected InvariantError";
  } catch (const InvariantError& e) {
    EXPECT_NE(std::string(e.what()).find("earth_q1"), std::string::npos) << e.what();
  }
}

TEST(LoadCorpus, SchemaErrorGivesFileAndPointer) {
  const auto dir = copy_mini("bad_schema");
  const auto file = dir / "lessons" / "cells.json";
  auto j = read_json(file);
  j["paragraphs"][2]["tokens"] = "not a list";
  write_json(file, j);
  try {
    load_corpus(dir);
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("cells.json"), std::string::npos) << msg;
    EXPECT_NE(msg.find("/paragraphs/2/tokens"), std::string::npos) << msg;
  }
}

TEST(LoadCorpus, MissingFieldIsSchemaError) {
  const auto dir = copy_mini("missing_field");
  const auto file = dir / "lessons" / "erosion.json";
  auto j = read_json(file);
  j["questions"][0].erase("candidates");
  write_json(file, j);
  EXPECT_THROW(load_corpus(dir), SchemaError);
}

TEST(LoadCorpus, TrueFalseNeedsTwoCandidates) {
  const auto dir = copy_mini("tf_three");
  const auto file = dir / "lessons" / "erosion.json";
  auto j = read_json(file);
  j["questions"][0]["candidates"].push_back({{"tokens", {"maybe"}}});
  write_json(file, j);
  EXPECT_THROW(load_corpus(dir), InvariantError);
}

TEST(LoadCorpus, TreeNodeCountMustMatchTokens) {
  const auto dir = copy_mini("tree_count");
  const auto file = dir / "lessons" / "erosion.json";
  auto j = read_json(file);
  j["paragraphs"][2]["tokens"].push_back("extra");
  write_json(file, j);
  EXPECT_THROW(load_corpus(dir), InvariantError);
}

TEST(LoadCorpus, CyclicTreeRejected) {
  auto c = one_lesson_corpus();
  auto& tree = c.lessons[0].paragraphs[0].dep_tree;
  tree.edges.push_back({0, 2, "dep"});
  EXPECT_THROW(validate_lesson(c.lessons[0]), InvariantError);
}

TEST(LoadCorpus, DiagramRelationOutOfRange) {
  auto c = load_corpus(mini_dir());
  c.lessons[0].diagrams[0].relations.push_back({0, 9});
  EXPECT_THROW(validate_lesson(c.lessons[0]), InvariantError);
}

TEST(LoadCorpus, MissingDirectoryIsIoError) {
  EXPECT_THROW(load_corpus("/nonexistent/tqa/corpus"), IoError);
}

TEST(LoadCorpus, RoundTrip) {
  const auto c = load_corpus(mini_dir());
  const auto dir = scratch_dir("roundtrip");
  save_corpus(c, dir);
  const auto again = load_corpus(dir);
  EXPECT_EQ(again, c);
  EXPECT_EQ(serialize_corpus(again), serialize_corpus(c));
}

TEST(Splits, Names) {
  EXPECT_EQ(parse_split("train"), Split::Train);
  EXPECT_EQ(parse_split("val"), Split::Val);
  EXPECT_EQ(parse_split("train+val"), Split::TrainVal);
  EXPECT_EQ(parse_split("all"), Split::All);
  EXPECT_FALSE(parse_split("test").has_value());
}

TEST(Embeddings, FileVectorsReturnedExactly) {
  const auto dir = scratch_dir("emb");
  const auto file = dir / "vectors.txt";
  std::ofstream(file) << "core 0.25 -1.5 3\nmantle 1e-3 0 -0.125\n";
  const auto table = load_embeddings(file, 3, 0);
  EXPECT_EQ(table.size(), 2u);
  EXPECT_EQ(table.lookup("core"), (std::vector<double>{0.25, -1.5, 3.0}));
  EXPECT_EQ(table.lookup("mantle"), (std::vector<double>{1e-3, 0.0, -0.125}));
}

TEST(Embeddings, WrongCountIsDimMismatchNamingLine) {
  const auto dir = scratch_dir("emb_bad");
  const auto file = dir / "vectors.txt";
  std::ofstream(file) << "core 0.25 -1.5 3\nmantle 1 2\n";
  try {
    load_embeddings(file, 3, 0);
    FAIL() << "expected DimMismatch";
  } catch (const DimMismatch& e) {
    EXPECT_NE(std::string(e.what()).find(":2"), std::string::npos) << e.what();
  }
}

TEST(Embeddings, UnreadableFileIsIoError) { EXPECT_THROW(load_embeddings("/nonexistent/vectors.txt", 3, 0), IoError); }

TEST(Embeddings, OovDeterministicPerSeed) {
  EmbeddingTable a(5, OovPolicy::RandomInit, 1), b(5, OovPolicy::RandomInit, 2);
  const auto first = a.lookup("magma");
  EXPECT_EQ(first, a.lookup("magma"));
  EXPECT_NE(first, b.lookup("magma"));
  EXPECT_NE(first, a.lookup("lava"));
  for (double v : first) {
    EXPECT_GE(v, -0.1);
    EXPECT_LT(v, 0.1);
  }
}

TEST(Embeddings, ZeroPolicyAndInsertChecks) {
  EmbeddingTable t(2, OovPolicy::Zero, 0);
  EXPECT_EQ(t.lookup("anything"), (std::vector<double>{0.0, 0.0}));
  EXPECT_THROW(t.insert("x", {1.0}), DimMismatch);
}

TEST(Vocabulary, UnknownIsRowZero) {
  const auto vocab = Vocabulary::from_corpus(load_corpus(mini_dir()));
  EXPECT_EQ(vocab.token(0), Vocabulary::kUnknown);
  EXPECT_EQ(vocab.index("never-seen"), 0u);
  EXPECT_TRUE(vocab.contains("mantle"));
  EXPECT_TRUE(vocab.contains("objects"));
  EXPECT_GT(vocab.index("mantle"), 0u);
}

TEST(Synthetic, SingleTrueFalseQuestion) {
  SynthSpec spec;
  spec.lessons = 1;
  spec.paragraphs_per_lesson = 1;
  spec.questions_per_lesson = 1;
  spec.true_false_fraction = 1.0;
  spec.text_mc_fraction = 0.0;
  spec.diagram_fraction = 0.0;
  const auto c = generate_synthetic_corpus(spec, 0);
  const auto qs = c.questions_in(Split::All);
  ASSERT_EQ(qs.size(), 1u);
  EXPECT_EQ(qs[0].question->kind, QuestionKind::TrueFalse);
  EXPECT_EQ(qs[0].question->candidates.size(), 2u);
}

TEST(Synthetic, Deterministic) {
  SynthSpec spec;
  EXPECT_EQ(serialize_corpus(generate_synthetic_corpus(spec, 11)), serialize_corpus(generate_synthetic_corpus(spec, 11)));
  EXPECT_NE(serialize_corpus(generate_synthetic_corpus(spec, 11)), serialize_corpus(generate_synthetic_corpus(spec, 12)));
}

TEST(Synthetic, DecidingTokenInExactlyOneParagraph) {
  SynthSpec spec;
  spec.lessons = 5;
  spec.paragraphs_per_lesson = 4;
  spec.questions_per_lesson = 10;
  const auto c = generate_synthetic_corpus(spec, 7);
  std::size_t checked = 0;
  for (const auto& l : c.lessons) {
    for (const auto& q : l.questions) {
      const auto& token = deciding_token(q);
      int containing = 0;
      for (const auto& p : l.paragraphs)
        containing += std::count(p.tokens.begin(), p.tokens.end(), token) > 0 ? 1 : 0;
      EXPECT_EQ(containing, 1) << q.id << " token " << token;
      ++checked;
    }
  }
  EXPECT_EQ(checked, 50u);
}

TEST(Synthetic, StructureContract) {
  SynthSpec spec;
  spec.val_lessons = 2;
  const auto c = generate_synthetic_corpus(spec, 3);
  EXPECT_EQ(c.lessons_in(Split::Val).size(), 2u);
  EXPECT_EQ(c.lessons_in(Split::Train).size(), 3u);
  for (const auto& l : c.lessons) {
    for (const auto& p : l.paragraphs) {
      ASSERT_EQ(p.dep_tree.edges.size() + 1, p.tokens.size());
      for (std::size_t i = 0; i < p.dep_tree.edges.size(); ++i) {
        EXPECT_EQ(p.dep_tree.edges[i].head, static_cast<int>(i + 1));
        EXPECT_EQ(p.dep_tree.edges[i].dependent, static_cast<int>(i));
        EXPECT_EQ(p.dep_tree.edges[i].relation, "dep");
      }
    }
    for (const auto& q : l.questions) {
      if (q.kind != QuestionKind::Diagram) continue;
      ASSERT_TRUE(q.question_diagram.has_value()) << q.id;
      const auto& dg = *q.question_diagram;
      EXPECT_GE(dg.entity_count, 3);
      EXPECT_LE(dg.entity_count, 6);
      const auto& answer = q.candidates[static_cast<std::size_t>(q.answer_index)].tokens;
      bool named = false;
      for (const auto& e : dg.entities) named = named || e.name_tokens == answer;
      EXPECT_TRUE(named) << q.id;
    }
  }
}

TEST(Synthetic, BadSpecsRejected) {
  SynthSpec spec;
  spec.lessons = 0;
  EXPECT_THROW(generate_synthetic_corpus(spec, 0), SpecError);
  spec = {};
  spec.questions_per_lesson = 0;
  EXPECT_THROW(generate_synthetic_corpus(spec, 0), SpecError);
  spec = {};
  spec.true_false_fraction = -0.1;
  EXPECT_THROW(generate_synthetic_corpus(spec, 0), SpecError);
}

}  // namespace
