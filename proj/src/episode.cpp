#include "tqa/episode.hpp"

#include "tqa/errors.hpp"

namespace tqa {

const TfidfIndex& LessonIndexCache::get(const Lesson& lesson) {
  auto it = indexes_.find(lesson.id);
  if (it == indexes_.end()) it = indexes_.emplace(lesson.id, TfidfIndex::build(lesson.paragraphs)).first;
  return it->second;
}

EpisodeStep make_text_step(const Paragraph& paragraph, const Tokens& question, const Tokens& candidate,
                           const ModelConfig& config) {
  EpisodeStep step;
  step.answer_tokens = candidate;
  step.paragraph_id = paragraph.id;
  step.anchors = anchor_nodes(paragraph.dep_tree, question, candidate);
  step.textual = build_textual_graph(paragraph.dep_tree, step.anchors, config.caps.textual, config.relation_nodes);
  step.context_words.insert(paragraph.tokens.begin(), paragraph.tokens.end());
  return step;
}

Tokens model_question_tokens(const Question& question, const ModelConfig& config) {
  Tokens tokens = question.tokens;
  if (question.question_diagram) {
    const auto extra = count_sentence(*question.question_diagram, noun_hint(question.tokens));
    tokens.insert(tokens.end(), extra.begin(), extra.end());
  }
  if (tokens.size() > config.max_seq_len) tokens.resize(config.max_seq_len);
  return tokens;
}

Episode prepare_qa_episode(const Lesson& lesson, const Question& question, const TfidfIndex& index,
                           const ModelConfig& config) {
  const auto n = question.candidates.size();
  if (n < kMinCandidates || n > std::min(kMaxCandidates, config.max_candidates))
    throw CandidateCountOutOfRange("question " + question.id + " has " + std::to_string(n) + " candidates");
  Episode episode;
  episode.question_id = question.id;
  episode.question_tokens = model_question_tokens(question, config);
  episode.label = static_cast<std::size_t>(question.answer_index);
  for (const auto& candidate : question.candidates) {
    const auto query = retrieval_query(question.tokens, candidate.tokens);
    const auto best = index.top_j(query, 1).front();
    auto step = make_text_step(lesson.paragraphs[best.position], question.tokens, candidate.tokens, config);
    if (config.fusion != FusionVariant::TextOnly) {
      if (auto d = select_visual_context(lesson, query)) {
        const auto& dg = lesson.diagrams[*d];
        step.visual = build_diagram_graph(dg, config.caps.visual, GraphKind::VisualContext);
        step.visual_id = dg.id;
        for (const auto& e : dg.entities) step.context_words.insert(e.name_tokens.begin(), e.name_tokens.end());
      }
    }
    episode.steps.push_back(std::move(step));
  }
  if (question.kind == QuestionKind::Diagram && question.question_diagram)
    episode.question_diagram =
        build_diagram_graph(*question.question_diagram, config.caps.question_diagram, GraphKind::QuestionDiagram);
  return episode;
}

}  // namespace tqa
