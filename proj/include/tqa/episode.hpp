#pragma once

#include <map>
#include <string>
#include <vector>

#include "tqa/corpus.hpp"
#include "tqa/model.hpp"
#include "tqa/retrieval.hpp"

namespace tqa {

// One tf-idf index per lesson, built on first use.
class LessonIndexCache {
 public:
  const TfidfIndex& get(const Lesson& lesson);

 private:
  std::map<std::string, TfidfIndex> indexes_;
};

// Textual graph for one paragraph with anchors from (question, candidate).
EpisodeStep make_text_step(const Paragraph& paragraph, const Tokens& question, const Tokens& candidate,
                           const ModelConfig& config);

// Question tokens as the model reads them: the count sentence of the
// question diagram is appended, then the sequence is cut to max_seq_len.
Tokens model_question_tokens(const Question& question, const ModelConfig& config);

// Per candidate k: the top tf-idf paragraph for [q ; A_k], its textual
// graph, and the best-overlapping lesson diagram as visual context. The
// question diagram graph is attached for diagram questions.
Episode prepare_qa_episode(const Lesson& lesson, const Question& question, const TfidfIndex& index,
                           const ModelConfig& config);

}  // namespace tqa
