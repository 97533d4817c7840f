#include <algorithm>

#include "tqa/harness.hpp"
#include "tqa/rng.hpp"
#include "tqa/ssoc.hpp"
#include "tqa/synth.hpp"

namespace tqa {

namespace {

ModelConfig tiny_config(FusionVariant fusion) {
  ModelConfig c;
  c.word_dim = 4;
  c.char_emb_dim = 3;
  c.char_rep_dim = 4;
  c.rnn_hidden = 3;
  c.gcn_dim = 3;
  c.fusion = fusion;
  return c;
}

const Question& first_of_kind(const Lesson& lesson, QuestionKind kind) {
  for (const auto& q : lesson.questions)
    if (q.kind == kind) return q;
  return lesson.questions.front();
}

GradcheckReport check_episode(const std::string& name, const Model& model, const Episode& episode,
                              std::uint64_t seed, double tolerance) {
  auto params = model.parameters();
  const auto loss_fn = [&](Tape& tape) {
    ForwardContext ctx;
    ctx.train = true;
    ctx.seed = seed;
    return ops::cross_entropy(tape, model.forward(tape, episode, ctx), episode.label);
  };
  GradcheckReport report{name, 0.0, true, 0};
  for (const auto& c : gradcheck_sampled(loss_fn, params, 48, derive_seed(seed, name))) {
    report.relative_error = std::max(report.relative_error, c.relative_error);
    report.skipped += c.skipped;
  }
  report.passed = report.relative_error < tolerance;
  return report;
}

}  // namespace

std::vector<GradcheckReport> gradcheck_model(std::uint64_t seed, double tolerance) {
  SynthSpec spec;
  spec.vocab_size = 12;
  spec.lessons = 1;
  spec.paragraphs_per_lesson = 3;
  spec.questions_per_lesson = 3;
  spec.true_false_fraction = 1.0;
  spec.text_mc_fraction = 1.0;
  spec.diagram_fraction = 1.0;
  spec.filler_per_paragraph = 3;
  const auto corpus = generate_synthetic_corpus(spec, seed);
  const auto& lesson = corpus.lessons.front();
  const auto index = TfidfIndex::build(lesson.paragraphs);
  const auto table = EmbeddingTable(4, OovPolicy::RandomInit, seed);

  std::vector<GradcheckReport> reports;
  for (auto [fusion, name] : {std::pair{FusionVariant::FGCN2, "qa_fgcn2_diagram"},
                              std::pair{FusionVariant::FGCN1, "qa_fgcn1_diagram"},
                              std::pair{FusionVariant::TextOnly, "qa_text_only_diagram"}}) {
    const auto config = tiny_config(fusion);
    const Model model(config, Vocabulary::from_corpus(corpus), table, seed);
    const auto episode = prepare_qa_episode(lesson, first_of_kind(lesson, QuestionKind::Diagram), index, config);
    reports.push_back(check_episode(name, model, episode, seed, tolerance));
  }

  const auto config = tiny_config(FusionVariant::FGCN2);
  const Model model(config, Vocabulary::from_corpus(corpus), table, seed);
  const auto tf = prepare_qa_episode(lesson, first_of_kind(lesson, QuestionKind::TrueFalse), index, config);
  reports.push_back(check_episode("qa_true_false_two_candidates", model, tf, seed, tolerance));

  SsocTask task;
  const auto& q = first_of_kind(lesson, QuestionKind::TextMC);
  task.lesson_id = lesson.id;
  task.question_id = q.id;
  task.j = 2;
  for (const auto& r : index.top_j(retrieval_query(q.tokens, q.candidates.front().tokens), 2))
    task.contexts.push_back(r.paragraph_id);
  const auto ssoc = prepare_ssoc_episode(corpus, task, config, ssoc_presentation_order(task, seed, true));
  reports.push_back(check_episode("ssoc_two_contexts", model, ssoc, seed, tolerance));
  return reports;
}

}  // namespace tqa
