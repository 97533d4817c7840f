#include <gtest/gtest.h>

#include <numeric>

#include "test_support.hpp"
#include "tfidf_oracle.hpp"
#include "tqa/config.hpp"
#include "tqa/ssoc.hpp"
#include "tqa/synth.hpp"
#include "tqa/trainer.hpp"

namespace {

using namespace tqa;
using tqa::testing::make_paragraph;
using tqa::testing::mini_dir;
using tqa::testing::oracle_for;

ModelConfig small_config() {
  ModelConfig c = desk_model_config();
  c.word_dim = 6;
  c.char_emb_dim = 4;
  c.char_rep_dim = 5;
  c.rnn_hidden = 4;
  c.gcn_dim = 3;
  return c;
}

Model make(const Corpus& corpus, const ModelConfig& config, std::uint64_t seed) {
  return Model(config, Vocabulary::from_corpus(corpus), EmbeddingTable(config.word_dim, OovPolicy::RandomInit, seed),
               seed);
}

TEST(Tasks, OnePerCandidate) {
  const auto corpus = load_corpus(mini_dir());
  const auto tasks = generate_ssoc_tasks(corpus, Split::All, 0);
  std::size_t candidates = 0;
  for (const auto& ref : corpus.questions_in(Split::All)) candidates += ref.question->candidates.size();
  EXPECT_EQ(tasks.size(), candidates);
  std::size_t for_q1 = 0;
  for (const auto& t : tasks) for_q1 += t.question_id == "earth_q1" ? 1 : 0;
  EXPECT_EQ(for_q1, 4u);
}

TEST(Tasks, SplitSelectsLessons) {
  const auto corpus = load_corpus(mini_dir());
  for (const auto& t : generate_ssoc_tasks(corpus, Split::Train, 0)) EXPECT_NE(t.lesson_id, "cells");
  EXPECT_GT(generate_ssoc_tasks(corpus, Split::TrainVal, 0).size(), generate_ssoc_tasks(corpus, Split::Train, 0).size());
}

TEST(Tasks, JClampedToParagraphCount) {
  Corpus c;
  Lesson l;
  l.id = "one";
  l.paragraphs = {make_paragraph("one_p0", {"only", "paragraph"})};
  Question q;
  q.id = "one_q0";
  q.kind = QuestionKind::TrueFalse;
  q.tokens = {"only"};
  q.candidates = {{{"true"}}, {{"false"}}};
  l.questions = {q};
  c.lessons = {l};
  c.manifest.train = {"one"};
  const auto tasks = generate_ssoc_tasks(c, Split::All, 0);
  ASSERT_EQ(tasks.size(), 2u);
  for (const auto& t : tasks) {
    EXPECT_EQ(t.j, 1);
    EXPECT_EQ(t.contexts, (std::vector<std::string>{"one_p0"}));
    EXPECT_EQ(t.label, 0u);
  }
  const auto episodes = ssoc_episodes(c, tasks, small_config(), 2, 0, true);
  EXPECT_TRUE(episodes.empty());
  const auto singles = ssoc_episodes(c, tasks, small_config(), 1, 0, true);
  ASSERT_EQ(singles.size(), 2u);
  const auto model = make(c, small_config(), 0);
  EXPECT_EQ(ssoc_forward(model, singles[0]), (std::vector<double>{1.0}));
}

TEST(Tasks, JWithinRange) {
  const auto corpus = generate_synthetic_corpus({.paragraphs_per_lesson = 9}, 2);
  std::set<int> seen;
  for (const auto& t : generate_ssoc_tasks(corpus, Split::All, 5)) {
    EXPECT_GE(t.j, 2);
    EXPECT_LE(t.j, 7);
    EXPECT_EQ(t.contexts.size(), static_cast<std::size_t>(t.j));
    seen.insert(t.j);
  }
  EXPECT_EQ(seen.size(), 6u);
}

TEST(Tasks, InvariantToAnswerIndexCorruption) {
  const auto corpus = load_corpus(mini_dir());
  auto corrupted = corpus;
  for (auto& l : corrupted.lessons)
    for (auto& q : l.questions) q.answer_index = (q.answer_index + 1) % static_cast<int>(q.candidates.size());
  for (std::uint64_t seed : {0u, 3u, 9u})
    EXPECT_EQ(generate_ssoc_tasks(corpus, Split::All, seed), generate_ssoc_tasks(corrupted, Split::All, seed));
  for (auto& l : corrupted.lessons)
    for (auto& q : l.questions) q.answer_index = -5;
  EXPECT_EQ(generate_ssoc_tasks(corpus, Split::All, 3), generate_ssoc_tasks(corrupted, Split::All, 3));
}

TEST(Tasks, OrderingMatchesOracleAndLabelIsArgmax) {
  const auto corpus = load_corpus(mini_dir());
  for (const auto& t : generate_ssoc_tasks(corpus, Split::All, 3)) {
    const auto* lesson = corpus.find_lesson(t.lesson_id);
    const auto& q = *corpus.find_question(t.question_id)->question;
    const auto oracle = oracle_for(*lesson);
    const auto query = retrieval_query(q.tokens, q.candidates[t.candidate_index].tokens);
    const auto ranking = oracle.ranking(query);
    ASSERT_EQ(t.contexts.size(), static_cast<std::size_t>(t.j));
    for (std::size_t r = 0; r < t.contexts.size(); ++r) {
      EXPECT_EQ(t.contexts[r], lesson->paragraphs[ranking[r]].id) << t.question_id;
      EXPECT_NEAR(t.scores[r], oracle.score(query, ranking[r]), 1e-9);
    }
    EXPECT_EQ(t.label, 0u);
    double best = 0;
    for (std::size_t i = 0; i < lesson->paragraphs.size(); ++i) best = std::max(best, oracle.score(query, i));
    EXPECT_NEAR(t.scores[t.label], best, 1e-12);
  }
}

TEST(Tasks, PureFunctionOfInputs) {
  const auto corpus = load_corpus(mini_dir());
  EXPECT_EQ(generate_ssoc_tasks(corpus, Split::All, 4), generate_ssoc_tasks(corpus, Split::All, 4));
  const auto a = generate_ssoc_tasks(corpus, Split::All, 4), b = generate_ssoc_tasks(corpus, Split::All, 5);
  std::vector<std::string> ida, idb;
  for (const auto& t : a) ida.push_back(t.question_id + std::to_string(t.candidate_index));
  for (const auto& t : b) idb.push_back(t.question_id + std::to_string(t.candidate_index));
  EXPECT_NE(ida, idb);
}

TEST(Presentation, LabelFollowsTopContext) {
  const auto corpus = load_corpus(mini_dir());
  const auto config = small_config();
  for (const auto& t : generate_ssoc_tasks(corpus, Split::All, 1)) {
    const auto order = ssoc_presentation_order(t, 1, true);
    auto sorted = order;
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::size_t> identity(order.size());
    std::iota(identity.begin(), identity.end(), 0);
    EXPECT_EQ(sorted, identity);
    EXPECT_EQ(ssoc_presentation_order(t, 1, false), identity);
    const auto episode = prepare_ssoc_episode(corpus, t, config, order);
    ASSERT_EQ(episode.steps.size(), t.contexts.size());
    EXPECT_EQ(episode.steps[episode.label].paragraph_id, t.contexts[0]);
    for (const auto& s : episode.steps) EXPECT_FALSE(s.visual.has_value());
  }
}

TEST(Forward, SimplexOverContexts) {
  const auto corpus = load_corpus(mini_dir());
  const auto config = small_config();
  const auto model = make(corpus, config, 2);
  for (const auto& e : ssoc_episodes(corpus, generate_ssoc_tasks(corpus, Split::All, 0), config, 2, 0, true)) {
    const auto p = ssoc_forward(model, e);
    EXPECT_EQ(p.size(), e.steps.size());
    EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-9);
  }
}

TEST(Pretrain, ZeroEpochsLeavesParameters) {
  const auto corpus = load_corpus(mini_dir());
  const auto config = small_config();
  auto model = make(corpus, config, 2);
  std::vector<std::vector<double>> before;
  for (const auto& p : model.parameters()) before.emplace_back(p.data().begin(), p.data().end());
  SsocConfig sc;
  sc.epochs = 0;
  AdamState state;
  EXPECT_TRUE(pretrain_ssoc(model, corpus, generate_ssoc_tasks(corpus, Split::All, 0), sc, state).empty());
  const auto after = model.parameters();
  for (std::size_t i = 0; i < after.size(); ++i)
    EXPECT_TRUE(std::equal(before[i].begin(), before[i].end(), after[i].data().begin()));
}

TEST(Pretrain, LossDecreasesOnFixture) {
  const auto corpus = load_corpus(mini_dir());
  const auto config = small_config();
  auto model = make(corpus, config, 0);
  SsocConfig sc;
  sc.epochs = 5;
  sc.lr = 0.01;
  AdamState state;
  std::size_t callbacks = 0;
  const auto metrics = pretrain_ssoc(model, corpus, generate_ssoc_tasks(corpus, Split::All, 0), sc, state,
                                     [&](const SsocEpochMetrics&, const AdamState&) { ++callbacks; });
  ASSERT_EQ(metrics.size(), 5u);
  EXPECT_EQ(callbacks, 5u);
  EXPECT_LT(metrics.back().train_loss, metrics.front().train_loss);
  EXPECT_NEAR(metrics[1].lr, metrics[0].lr * sc.lr_decay, 1e-15);
}

}  // namespace
