#include "tqa/synth.hpp"

#include <algorithm>
#include <cmath>

#include "tqa/errors.hpp"
#include "tqa/rng.hpp"

namespace tqa {

namespace {

std::string tag(const char* prefix, int lesson, int item, int sub = -1) {
  auto out = std::string(prefix) + std::to_string(lesson) + "x" + std::to_string(item);
  if (sub >= 0) out += "x" + std::to_string(sub);
  return out;
}

std::string padded(int value) {
  auto s = std::to_string(value);
  return std::string(s.size() < 3 ? 3 - s.size() : 0, '0') + s;
}

DependencyTree left_chain(const Tokens& tokens) {
  DependencyTree tree;
  for (std::size_t i = 0; i < tokens.size(); ++i) tree.nodes.push_back({static_cast<int>(i), tokens[i]});
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i)
    tree.edges.push_back({static_cast<int>(i + 1), static_cast<int>(i), "dep"});
  return tree;
}

std::vector<QuestionKind> kind_plan(const SynthSpec& spec, Rng& rng) {
  const int n = spec.questions_per_lesson;
  const int tf = static_cast<int>(std::lround(spec.true_false_fraction * n));
  const int dg = std::min(n - tf, static_cast<int>(std::lround(spec.diagram_fraction * n)));
  std::vector<QuestionKind> kinds;
  kinds.insert(kinds.end(), static_cast<std::size_t>(tf), QuestionKind::TrueFalse);
  kinds.insert(kinds.end(), static_cast<std::size_t>(dg), QuestionKind::Diagram);
  kinds.insert(kinds.end(), static_cast<std::size_t>(n - tf - dg), QuestionKind::TextMC);
  shuffle(kinds, rng);
  return kinds;
}

}  // namespace

const std::string& deciding_token(const Question& question) {
  if (question.kind == QuestionKind::TrueFalse) return question.tokens.back();
  return question.candidates.at(static_cast<std::size_t>(question.answer_index)).tokens.front();
}

Corpus generate_synthetic_corpus(const SynthSpec& spec, std::uint64_t seed) {
  if (spec.vocab_size <= 0 || spec.lessons <= 0 || spec.paragraphs_per_lesson <= 0 || spec.questions_per_lesson <= 0)
    throw SpecError("synthetic corpus needs positive vocab, lesson, paragraph and question counts");
  const double total = spec.true_false_fraction + spec.text_mc_fraction + spec.diagram_fraction;
  if (spec.true_false_fraction < 0 || spec.text_mc_fraction < 0 || spec.diagram_fraction < 0 || total <= 0)
    throw SpecError("question kind fractions must be nonnegative and not all zero");
  if (spec.val_lessons < 0 || spec.val_lessons > spec.lessons) throw SpecError("val_lessons out of range");
  if (spec.filler_per_paragraph < 0) throw SpecError("negative filler count");
  SynthSpec norm = spec;
  norm.true_false_fraction /= total;
  norm.text_mc_fraction /= total;
  norm.diagram_fraction /= total;

  Rng rng(derive_seed(seed, "synthetic-corpus"));
  auto filler = [&] { return "w" + std::to_string(uniform_int(rng, 0, spec.vocab_size - 1)); };

  Corpus corpus;
  for (int l = 0; l < spec.lessons; ++l) {
    Lesson lesson;
    lesson.id = "lesson_" + padded(l);
    const int np = spec.paragraphs_per_lesson;
    std::vector<Tokens> keys(static_cast<std::size_t>(np));
    std::vector<Tokens> body(static_cast<std::size_t>(np));
    for (int p = 0; p < np; ++p) {
      keys[p] = {tag("key", l, p, 0), tag("key", l, p, 1)};
      body[p] = keys[p];
      for (int f = 0; f < spec.filler_per_paragraph; ++f) body[p].push_back(filler());
    }

    const auto kinds = kind_plan(norm, rng);
    for (int qi = 0; qi < spec.questions_per_lesson; ++qi) {
      Question q;
      q.id = lesson.id + "_q" + std::to_string(qi);
      q.kind = kinds[static_cast<std::size_t>(qi)];
      const auto target = static_cast<std::size_t>(uniform_int(rng, 0, np - 1));
      q.tokens = {"what", "about"};
      q.tokens.insert(q.tokens.end(), keys[target].begin(), keys[target].end());

      if (q.kind == QuestionKind::TrueFalse) {
        const bool truth = np == 1 || uniform01(rng) < 0.5;
        auto host = target;
        if (!truth) {
          host = static_cast<std::size_t>(uniform_int(rng, 0, np - 2));
          if (host >= target) ++host;
        }
        const auto claim = tag("claim", l, qi);
        body[host].push_back(claim);
        q.tokens.push_back("is");
        q.tokens.push_back(claim);
        q.candidates = {{{"true"}}, {{"false"}}};
        q.answer_index = truth ? 0 : 1;
      } else {
        const auto answer = tag("ans", l, qi);
        body[target].push_back(answer);
        const int n = static_cast<int>(uniform_int(rng, 3, 5));
        q.answer_index = static_cast<int>(uniform_int(rng, 0, n - 1));
        for (int k = 0, d = 0; k < n; ++k)
          q.candidates.push_back({{k == q.answer_index ? answer : tag("opt", l, qi, d++)}});
        if (q.kind == QuestionKind::Diagram) {
          DiagramGraph dg;
          dg.id = q.id + "_diagram";
          const int count = static_cast<int>(uniform_int(rng, 3, 6));
          const int slot = static_cast<int>(uniform_int(rng, 0, count - 1));
          for (int e = 0; e < count; ++e) dg.entities.push_back({e, {e == slot ? answer : filler()}});
          for (int e = 0; e + 1 < count; ++e) dg.relations.emplace_back(e, e + 1);
          dg.entity_count = count;
          q.question_diagram = std::move(dg);
        }
      }
      lesson.questions.push_back(std::move(q));
    }

    for (int p = 0; p < np; ++p) {
      auto tokens = body[static_cast<std::size_t>(p)];
      shuffle(tokens, rng);
      lesson.paragraphs.push_back({lesson.id + "_p" + std::to_string(p), tokens, left_chain(tokens)});
    }

    DiagramGraph dg;
    dg.id = lesson.id + "_d0";
    const int count = std::min(np, 6);
    for (int e = 0; e < count; ++e) dg.entities.push_back({e, {keys[static_cast<std::size_t>(e)][0]}});
    for (int e = 0; e + 1 < count; ++e) dg.relations.emplace_back(e, e + 1);
    dg.entity_count = count;
    lesson.diagrams.push_back(std::move(dg));

    (l < spec.lessons - spec.val_lessons ? corpus.manifest.train : corpus.manifest.val).push_back(lesson.id);
    corpus.lessons.push_back(std::move(lesson));
  }
  corpus.manifest.counts = corpus.computed_counts();
  validate_corpus(corpus);
  return corpus;
}

}  // namespace tqa
