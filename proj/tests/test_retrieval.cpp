#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "test_support.hpp"
#include "tfidf_oracle.hpp"
#include "tqa/errors.hpp"
#include "tqa/retrieval.hpp"

namespace {

using namespace tqa;
using tqa::testing::make_paragraph;
using tqa::testing::mini_dir;
using tqa::testing::Oracle;
using tqa::testing::oracle_for;

TEST(Index, SingleParagraph) {
  const std::vector<Paragraph> ps = {make_paragraph("p", {"a", "b"})};
  const auto idx = TfidfIndex::build(ps);
  EXPECT_EQ(idx.doc_count(), 1);
  EXPECT_EQ(idx.df(), (std::map<std::string, int>{{"a", 1}, {"b", 1}}));
}

TEST(Index, TwoParagraphs) {
  const std::vector<Paragraph> ps = {make_paragraph("p0", {"a"}), make_paragraph("p1", {"a", "b"})};
  EXPECT_EQ(TfidfIndex::build(ps).df(), (std::map<std::string, int>{{"a", 2}, {"b", 1}}));
}

TEST(Index, EmptyInputRejected) {
  EXPECT_THROW(TfidfIndex::build(std::span<const Paragraph>{}), EmptyInput);
}

TEST(Index, EarthLessonDfByHand) {
  const auto c = load_corpus(mini_dir());
  const auto idx = TfidfIndex::build(c.find_lesson("earth_interior")->paragraphs);
  const std::map<std::string, int> expected = {
      {"convection", 1}, {"currents", 1}, {"in", 1},      {"the", 3},       {"mantle", 1},  {"move", 1},
      {"plates", 1},     {"outer", 1},    {"core", 2},    {"is", 2},        {"made", 1},    {"of", 2},
      {"liquid", 1},     {"iron", 1},     {"and", 1},     {"nickel", 1},    {"inner", 1},   {"solid", 1},
      {"because", 1},    {"extreme", 1},  {"pressure", 1}};
  EXPECT_EQ(idx.df(), expected);
  EXPECT_EQ(idx.doc_count(), 3);
}

TEST(Score, IdenticalUniqueParagraphIsOne) {
  const Tokens unique = {"ribosomes", "build", "new", "proteins"};
  const std::vector<Paragraph> ps = {make_paragraph("x", unique), make_paragraph("y", {"other", "words"})};
  const auto idx = TfidfIndex::build(ps);
  EXPECT_NEAR(idx.score(unique, "x"), 1.0, 1e-12);
  const auto top = idx.top_j(unique, 1);
  ASSERT_EQ(top.size(), 1u);
  EXPECT_EQ(top[0].paragraph_id, "x");
}

TEST(Score, NoOverlapIsZero) {
  const auto c = load_corpus(mini_dir());
  const auto idx = TfidfIndex::build(c.find_lesson("erosion")->paragraphs);
  EXPECT_EQ(idx.score({"nucleus", "lysosome"}, "erosion_p0"), 0.0);
  EXPECT_EQ(idx.score({}, "erosion_p0"), 0.0);
}

TEST(Score, UnknownParagraph) {
  const auto c = load_corpus(mini_dir());
  const auto idx = TfidfIndex::build(c.find_lesson("erosion")->paragraphs);
  EXPECT_THROW(idx.score({"wind"}, "cells_p0"), UnknownParagraph);
}

TEST(Score, WaterErosionMatchesOracle) {
  const auto c = load_corpus(mini_dir());
  const auto& l = *c.find_lesson("erosion");
  const auto idx = TfidfIndex::build(l.paragraphs);
  const auto o = oracle_for(l);
  const Tokens query = {"water", "erosion"};
  for (std::size_t i = 0; i < l.paragraphs.size(); ++i)
    EXPECT_NEAR(idx.score(query, l.paragraphs[i].id), o.score(query, i), 1e-9);
  const auto top = idx.top_j(query, 3);
  ASSERT_EQ(top.size(), 3u);
  const auto expected = o.ranking(query);
  for (std::size_t r = 0; r < 3; ++r) EXPECT_EQ(top[r].position, expected[r]);
  EXPECT_EQ(top[0].paragraph_id, "erosion_p0");
}

TEST(Score, EveryFixtureQueryMatchesOracle) {
  const auto c = load_corpus(mini_dir());
  std::size_t queries = 0, candidates = 0;
  for (const auto& l : c.lessons) {
    for (const auto& q : l.questions) candidates += q.candidates.size();
    const auto idx = TfidfIndex::build(l.paragraphs);
    const auto o = oracle_for(l);
    for (const auto& q : l.questions) {
      for (const auto& cand : q.candidates) {
        const auto query = retrieval_query(q.tokens, cand.tokens);
        const auto top = idx.top_j(query, 7);
        const auto expected = o.ranking(query);
        ASSERT_EQ(top.size(), l.paragraphs.size());
        for (std::size_t r = 0; r < top.size(); ++r) {
          EXPECT_EQ(top[r].position, expected[r]) << q.id;
          EXPECT_NEAR(top[r].score, o.score(query, expected[r]), 1e-9) << q.id;
          EXPECT_EQ(top[r].paragraph_id, l.paragraphs[top[r].position].id);
        }
        ++queries;
      }
    }
  }
  EXPECT_EQ(queries, candidates);
}

TEST(TopJ, TieGoesToEarlierParagraph) {
  const auto c = load_corpus(mini_dir());
  const auto& l = *c.find_lesson("cells");
  const auto idx = TfidfIndex::build(l.paragraphs);
  const Tokens query = {"nucleus", "ribosomes"};
  const double s2 = idx.score(query, "cells_p2"), s3 = idx.score(query, "cells_p3");
  ASSERT_EQ(s2, s3);
  ASSERT_GT(s2, 0.0);
  const auto top = idx.top_j(query, 4);
  EXPECT_EQ(top[0].paragraph_id, "cells_p2");
  EXPECT_EQ(top[1].paragraph_id, "cells_p3");
  // Zero-score paragraphs also keep position order.
  EXPECT_EQ(top[2].paragraph_id, "cells_p0");
  EXPECT_EQ(top[3].paragraph_id, "cells_p1");
  const auto o = oracle_for(l);
  EXPECT_EQ(o.ranking(query), (std::vector<std::size_t>{2, 3, 0, 1}));
}

TEST(TopJ, ClampAndReject) {
  const auto c = load_corpus(mini_dir());
  const auto idx = TfidfIndex::build(c.find_lesson("erosion")->paragraphs);
  EXPECT_EQ(idx.top_j({"wind"}, 10).size(), 3u);
  EXPECT_THROW(idx.top_j({"wind"}, 0), SpecError);
}

TEST(Score, SymmetricForIndexedDocuments) {
  const auto c = load_corpus(mini_dir());
  for (const auto& l : c.lessons) {
    const auto idx = TfidfIndex::build(l.paragraphs);
    for (const auto& a : l.paragraphs)
      for (const auto& b : l.paragraphs) EXPECT_NEAR(idx.score(a.tokens, b.id), idx.score(b.tokens, a.id), 1e-12);
  }
}

TEST(Score, BoundedAndNonIncreasing) {
  const auto c = load_corpus(mini_dir());
  for (const auto& l : c.lessons) {
    const auto idx = TfidfIndex::build(l.paragraphs);
    for (const auto& q : l.questions) {
      const auto top = idx.top_j(q.tokens, 7);
      for (std::size_t r = 0; r < top.size(); ++r) {
        EXPECT_GE(top[r].score, 0.0);
        EXPECT_LE(top[r].score, 1.0);
        if (r > 0) {
          EXPECT_LE(top[r].score, top[r - 1].score);
        }
      }
    }
  }
}

TEST(Score, UnseenTokenIdf) {
  const std::vector<Paragraph> ps = {make_paragraph("p0", {"a"}), make_paragraph("p1", {"a", "b"})};
  const auto idx = TfidfIndex::build(ps);
  EXPECT_NEAR(idx.idf("zzz"), std::log(3.0) + 1.0, 1e-15);
  EXPECT_NEAR(idx.idf("a"), std::log(3.0 / 3.0) + 1.0, 1e-15);
  EXPECT_NEAR(idx.idf("b"), std::log(3.0 / 2.0) + 1.0, 1e-15);
}

}  // namespace
