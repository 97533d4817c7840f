#pragma once

#include <cstdint>

#include "tqa/corpus.hpp"

namespace tqa {

struct SynthSpec {
  int vocab_size = 60;
  int lessons = 5;
  int paragraphs_per_lesson = 4;
  int questions_per_lesson = 10;
  double true_false_fraction = 0.3;
  double text_mc_fraction = 0.4;
  double diagram_fraction = 0.3;
  // Trailing lessons assigned to the val split.
  int val_lessons = 0;
  int filler_per_paragraph = 8;
};

// Deterministic toy corpus. Every paragraph carries two key tokens found
// nowhere else; each question names the keys of its target paragraph. The
// token that decides the answer (the correct candidate for MC and diagram
// questions, the trailing claim token for T/F) is planted in exactly one
// paragraph of the lesson. Throws SpecError on zero counts or bad fractions.
Corpus generate_synthetic_corpus(const SynthSpec& spec, std::uint64_t seed);

// Token that decides a generated question (see above).
const std::string& deciding_token(const Question& question);

}  // namespace tqa
