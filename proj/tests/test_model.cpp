#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "test_support.hpp"
#include "tqa/config.hpp"
#include "tqa/episode.hpp"
#include "tqa/errors.hpp"
#include "tqa/harness.hpp"
#include "tqa/model.hpp"
#include "tqa/rng.hpp"

namespace {

using namespace tqa;
using tqa::testing::mini_dir;

ModelConfig small_config(FusionVariant fusion = FusionVariant::FGCN2) {
  ModelConfig c = desk_model_config();
  c.word_dim = 6;
  c.char_emb_dim = 4;
  c.char_rep_dim = 5;
  c.rnn_hidden = 4;
  c.gcn_dim = 3;
  c.fusion = fusion;
  return c;
}

Model fixture_model(const Corpus& corpus, const ModelConfig& config, std::uint64_t seed = 1) {
  return Model(config, Vocabulary::from_corpus(corpus), EmbeddingTable(config.word_dim, OovPolicy::RandomInit, seed),
               seed);
}

Tensor random_matrix(Rng& rng, std::size_t r, std::size_t c) {
  std::vector<double> v(r * c);
  for (auto& x : v) x = uniform(rng, -1.0, 1.0);
  return Tensor::from({r, c}, std::move(v));
}

Tensor identity(std::size_t n) {
  auto t = Tensor::zeros({n, n});
  for (std::size_t i = 0; i < n; ++i) t[i * n + i] = 1.0;
  return t;
}

Episode fixture_episode(const Corpus& corpus, const std::string& qid, const ModelConfig& config) {
  const auto ref = corpus.find_question(qid);
  LessonIndexCache cache;
  return prepare_qa_episode(*ref->lesson, *ref->question, cache.get(*ref->lesson), config);
}

TEST(Encode, WidthAndFlags) {
  const auto corpus = load_corpus(mini_dir());
  const auto config = small_config();
  const auto model = fixture_model(corpus, config);
  Tape tape;
  ForwardContext ctx;
  const Tokens tokens = {"the", "inner", "core", "is", "liquid"};
  const auto x = model.encode_tokens(tape, tokens, {"core", "liquid"}, true, ctx);
  ASSERT_EQ(x.rows(), 5u);
  ASSERT_EQ(x.cols(), config.word_dim + config.char_rep_dim + 1);
  const std::vector<double> flags = {0, 0, 1, 0, 1};
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(x.at(i, x.cols() - 1), flags[i]);
  const auto none = model.encode_tokens(tape, tokens, {}, true, ctx);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(none.at(i, none.cols() - 1), 0.0);
  const auto disabled = model.encode_tokens(tape, tokens, {"core"}, false, ctx);
  EXPECT_EQ(disabled.at(2, disabled.cols() - 1), 0.0);
}

TEST(Encode, PaperWidthIs333) {
  const ModelConfig paper;
  EXPECT_EQ(paper.word_dim + paper.char_rep_dim + 1, 333u);
  EXPECT_EQ(paper.context_dim(), 200u);
  ModelConfig f1;
  f1.fusion = FusionVariant::FGCN1;
  EXPECT_EQ(f1.context_dim(), 400u);
}

TEST(Encode, TruncatesToMaxSeqLen) {
  const auto corpus = load_corpus(mini_dir());
  auto config = small_config();
  config.max_seq_len = 3;
  const auto model = fixture_model(corpus, config);
  Tape tape;
  ForwardContext ctx;
  EXPECT_EQ(model.encode_tokens(tape, {"a", "b", "c", "d", "e"}, {}, true, ctx).rows(), 3u);
}

TEST(CharCnn, ShapeAndDeterminism) {
  const auto corpus = load_corpus(mini_dir());
  const auto config = small_config();
  const auto model = fixture_model(corpus, config);
  Tape tape;
  ForwardContext a, b;
  const auto one = model.char_cnn(tape, "x", a);
  EXPECT_EQ(one.shape(), (Shape{1, config.char_rep_dim}));
  for (double v : one.data()) EXPECT_TRUE(std::isfinite(v));
  const auto again = model.char_cnn(tape, "mantle", a);
  const auto fresh = model.char_cnn(tape, "mantle", b);
  EXPECT_TRUE(std::equal(again.data().begin(), again.data().end(), fresh.data().begin()));
  const auto other = model.char_cnn(tape, "crust", b);
  EXPECT_FALSE(std::equal(again.data().begin(), again.data().end(), other.data().begin()));
}

TEST(Comprehend, SingleStepAndDominance) {
  const auto corpus = load_corpus(mini_dir());
  const auto config = small_config();
  const auto model = fixture_model(corpus, config);
  Tape tape;
  ForwardContext ctx;
  const auto x1 = model.encode_tokens(tape, {"core"}, {}, true, ctx);
  const auto h1 = model.comprehend(tape, x1);
  const auto& p = model.params();
  const auto s1 = ops::bilstm_sequence(tape, x1, 1, p.rnn_c_fwd, p.rnn_c_bwd);
  ASSERT_EQ(h1.size(), 2 * config.rnn_hidden);
  for (std::size_t i = 0; i < h1.size(); ++i) EXPECT_EQ(h1[i], s1[i]);

  const auto x = model.encode_tokens(tape, {"the", "outer", "core", "is", "liquid"}, {}, true, ctx);
  const auto h = model.comprehend(tape, x);
  const auto states = ops::bilstm_sequence(tape, x, x.rows(), p.rnn_c_fwd, p.rnn_c_bwd);
  for (std::size_t r = 0; r < states.rows(); ++r)
    for (std::size_t c = 0; c < states.cols(); ++c) EXPECT_GE(h[c], states.at(r, c));
}

TEST(Gcn, IdentityPropagation) {
  Tape tape;
  const auto c = Tensor::from({2, 2}, {0.3, -0.7, 1.2, 0.1});
  const auto out = gcn_layer(tape, c, identity(2), identity(2));
  for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(out[i], std::tanh(c[i]));
}

TEST(Gcn, TwoNodeHalfAdjacency) {
  Tape tape;
  const auto a = Tensor::from({2, 2}, {0.5, 0.5, 0.5, 0.5});
  const auto out = gcn_layer(tape, identity(2), a, identity(2));
  for (double v : out.data()) EXPECT_NEAR(v, std::tanh(0.5), 1e-15);
  EXPECT_THROW(gcn_layer(tape, identity(3), a, identity(3)), ShapeMismatch);
}

TEST(Gcn, RandomMatchesDenseOracle) {
  Rng rng(4);
  Tape tape;
  const auto c = random_matrix(rng, 3, 4), a = random_matrix(rng, 3, 3), w = random_matrix(rng, 4, 2);
  const auto out = gcn_layer(tape, c, a, w);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      double s = 0;
      for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t m = 0; m < 4; ++m) s += a.at(i, k) * c.at(k, m) * w.at(m, j);
      EXPECT_NEAR(out.at(i, j), std::tanh(s), 1e-14);
    }
}

TEST(FuseFgcn1, MissingVisualIsZeroHalf) {
  Rng rng(8);
  Tape tape;
  const auto hct = random_matrix(rng, 4, 3);
  const auto out = fuse_fgcn1(tape, hct, std::nullopt);
  ASSERT_EQ(out.shape(), (Shape{4, 6}));
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 6; ++j) EXPECT_EQ(out.at(i, j), j < 3 ? hct.at(i, j) : 0.0);
}

TEST(FuseFgcn1, SingletonVisualReplicated) {
  Rng rng(9);
  Tape tape;
  const auto hct = random_matrix(rng, 3, 2), hcd = random_matrix(rng, 1, 2);
  const auto out = fuse_fgcn1(tape, hct, hcd);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(out.at(i, 2 + j), hcd.at(0, j), 1e-15);
}

TEST(FuseFgcn1, RandomMatchesOracle) {
  Rng rng(10);
  Tape tape;
  const auto hct = random_matrix(rng, 3, 2), hcd = random_matrix(rng, 2, 2);
  const auto out = fuse_fgcn1(tape, hct, hcd);
  for (std::size_t t = 0; t < 3; ++t) {
    double g[2], zsum = 0;
    for (std::size_t d = 0; d < 2; ++d) {
      g[d] = hcd.at(d, 0) * hct.at(t, 0) + hcd.at(d, 1) * hct.at(t, 1);
      zsum += std::exp(g[d]);
    }
    for (std::size_t j = 0; j < 2; ++j) {
      double v = 0;
      for (std::size_t d = 0; d < 2; ++d) v += std::exp(g[d]) / zsum * hcd.at(d, j);
      EXPECT_EQ(out.at(t, j), hct.at(t, j));
      EXPECT_NEAR(out.at(t, 2 + j), v, 1e-14);
    }
  }
  EXPECT_THROW(fuse_fgcn1(tape, hct, random_matrix(rng, 2, 3)), ShapeMismatch);
}

TEST(FuseFgcn2, MirrorsGcnLayer) {
  Rng rng(11);
  Tape tape;
  const auto h1 = random_matrix(rng, 2, 4), w = random_matrix(rng, 4, 2);
  const auto a = Tensor::from({2, 2}, {0.5, 0.5, 0.5, 0.5});
  const auto out = fuse_fgcn2(tape, h1, a, w);
  const auto ref = gcn_layer(tape, h1, a, w);
  EXPECT_TRUE(std::equal(out.data().begin(), out.data().end(), ref.data().begin()));
  const auto id = fuse_fgcn2(tape, Tensor::from({2, 2}, {0.1, 0.2, 0.3, 0.4}), identity(2), identity(2));
  EXPECT_DOUBLE_EQ(id[3], std::tanh(0.4));
}

TEST(Attend, ZeroMatrixGivesColumnMean) {
  Rng rng(12);
  Tape tape;
  const auto h = random_matrix(rng, 1, 3), hc = random_matrix(rng, 4, 2);
  const auto out = attend(tape, h, hc, Tensor::zeros({3, 2}));
  for (std::size_t j = 0; j < 2; ++j) {
    double mean = 0;
    for (std::size_t k = 0; k < 4; ++k) mean += hc.at(k, j) / 4.0;
    EXPECT_NEAR(out[j], mean, 1e-15);
  }
}

TEST(Attend, SingleRowAndOracle) {
  Rng rng(13);
  Tape tape;
  const auto h = random_matrix(rng, 1, 3), m = random_matrix(rng, 3, 2);
  const auto one = random_matrix(rng, 1, 2);
  const auto out1 = attend(tape, h, one, m);
  EXPECT_NEAR(out1[0], one[0], 1e-15);
  EXPECT_NEAR(out1[1], one[1], 1e-15);

  const auto hc = random_matrix(rng, 3, 2);
  const auto out = attend(tape, h, hc, m);
  std::vector<double> g(3);
  double z = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    for (std::size_t a = 0; a < 3; ++a)
      for (std::size_t b = 0; b < 2; ++b) g[k] += h[a] * m.at(a, b) * hc.at(k, b);
    z += std::exp(g[k]);
  }
  for (std::size_t j = 0; j < 2; ++j) {
    double v = 0;
    for (std::size_t k = 0; k < 3; ++k) v += std::exp(g[k]) / z * hc.at(k, j);
    EXPECT_NEAR(out[j], v, 1e-14);
  }
  EXPECT_THROW(attend(tape, h, hc, Tensor::zeros({2, 2})), ShapeMismatch);
}

TEST(Score, ZeroWeightsGiveUniform) {
  const auto corpus = load_corpus(mini_dir());
  const auto config = small_config();
  auto model = fixture_model(corpus, config);
  model.fill(0.0);
  for (const auto& ref : corpus.questions_in(Split::All)) {
    const auto probs = model.probabilities(fixture_episode(corpus, ref.question->id, config));
    for (double p : probs) EXPECT_NEAR(p, 1.0 / static_cast<double>(probs.size()), 1e-15) << ref.question->id;
  }
}

TEST(Score, SimplexAndDeterminism) {
  const auto corpus = load_corpus(mini_dir());
  for (auto fusion : {FusionVariant::FGCN1, FusionVariant::FGCN2, FusionVariant::TextOnly}) {
    const auto config = small_config(fusion);
    const auto model = fixture_model(corpus, config, 3);
    const auto twin = fixture_model(corpus, config, 3);
    for (const auto& ref : corpus.questions_in(Split::All)) {
      const auto episode = fixture_episode(corpus, ref.question->id, config);
      const auto probs = model.probabilities(episode);
      ASSERT_EQ(probs.size(), ref.question->candidates.size());
      for (double p : probs) EXPECT_GE(p, 0.0);
      EXPECT_NEAR(std::accumulate(probs.begin(), probs.end(), 0.0), 1.0, 1e-9);
      EXPECT_EQ(probs, twin.probabilities(episode));
      EXPECT_EQ(probs, model.probabilities(episode));
    }
  }
}

TEST(Score, CandidateCountChecked) {
  const auto corpus = load_corpus(mini_dir());
  const auto config = small_config();
  const auto model = fixture_model(corpus, config);
  auto episode = fixture_episode(corpus, "erosion_q0", config);
  episode.steps.resize(1);
  EXPECT_THROW(model.probabilities(episode), CandidateCountOutOfRange);
  auto big = fixture_episode(corpus, "erosion_q0", config);
  while (big.steps.size() < 8) big.steps.push_back(big.steps[0]);
  EXPECT_THROW(model.probabilities(big), CandidateCountOutOfRange);
}

TEST(Score, Fgcn1ContextWidthIsDoubleGcn) {
  const auto config = small_config(FusionVariant::FGCN1);
  const auto corpus = load_corpus(mini_dir());
  const auto model = fixture_model(corpus, config);
  EXPECT_EQ(model.params().att_qc.shape(), (Shape{2 * config.rnn_hidden, 2 * config.gcn_dim}));
  EXPECT_EQ(config.step_dim(), 4 * config.rnn_hidden + 4 * config.gcn_dim + 2 * config.gcn_dim);
}

TEST(Score, DiagramQuestionGetsQuestionGraphAndCountSentence) {
  const auto corpus = load_corpus(mini_dir());
  const auto config = small_config();
  const auto episode = fixture_episode(corpus, "cells_q3", config);
  ASSERT_TRUE(episode.question_diagram.has_value());
  EXPECT_EQ(episode.question_diagram->kind, GraphKind::QuestionDiagram);
  const auto& qt = episode.question_tokens;
  ASSERT_GE(qt.size(), 4u);
  EXPECT_EQ(qt[qt.size() - 4], "there");
  EXPECT_EQ(qt.back(), "objects");
  const auto text = fixture_episode(corpus, "cells_q1", config);
  EXPECT_FALSE(text.question_diagram.has_value());
}

TEST(Episode, ParagraphIsTopRetrieval) {
  const auto corpus = load_corpus(mini_dir());
  const auto config = small_config();
  LessonIndexCache cache;
  for (const auto& ref : corpus.questions_in(Split::All)) {
    const auto& index = cache.get(*ref.lesson);
    const auto episode = prepare_qa_episode(*ref.lesson, *ref.question, index, config);
    for (std::size_t k = 0; k < episode.steps.size(); ++k) {
      const auto top = index.top_j(retrieval_query(ref.question->tokens, ref.question->candidates[k].tokens), 1);
      EXPECT_EQ(episode.steps[k].paragraph_id, top[0].paragraph_id);
    }
  }
}

TEST(Checkpoint, RoundTripThroughFile) {
  const auto corpus = load_corpus(mini_dir());
  const auto config = small_config();
  const auto model = fixture_model(corpus, config, 5);
  auto other = fixture_model(corpus, config, 6);
  const auto path = tqa::testing::scratch_dir("ckpt") / "m.ckpt";
  save_checkpoint(path, model.to_checkpoint("", std::nullopt));
  other.load_parameters(load_checkpoint(path));
  const auto episode = fixture_episode(corpus, "earth_q1", config);
  EXPECT_EQ(model.probabilities(episode), other.probabilities(episode));
}

TEST(Checkpoint, ShapeMismatchRejected) {
  const auto corpus = load_corpus(mini_dir());
  const auto model = fixture_model(corpus, small_config());
  auto wider = small_config();
  wider.gcn_dim = 5;
  auto other = fixture_model(corpus, wider);
  EXPECT_THROW(other.load_parameters(model.to_checkpoint("", std::nullopt)), CheckpointError);
}

TEST(Gradcheck, FullModelSeedZero) {
  for (const auto& r : gradcheck_model(0)) EXPECT_TRUE(r.passed) << r.name << " " << r.relative_error;
}

}  // namespace
