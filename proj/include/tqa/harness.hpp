#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tqa/adam.hpp"
#include "tqa/config.hpp"
#include "tqa/corpus.hpp"
#include "tqa/episode.hpp"
#include "tqa/gradcheck.hpp"
#include "tqa/model.hpp"

namespace tqa {

struct BucketScore {
  std::size_t correct = 0;
  std::size_t total = 0;
  std::optional<double> accuracy() const;
};

struct QuestionPrediction {
  std::string question_id;
  QuestionKind kind = QuestionKind::TextMC;
  std::size_t predicted = 0;
  std::size_t answer = 0;
  std::vector<double> probabilities;
};

// Column names in report order.
inline const std::vector<std::string> kReportColumns = {"Text T/F", "Text MC", "Text All", "Diagram", "All"};

struct EvalReport {
  BucketScore text_tf, text_mc, text_all, diagram, all;
  std::vector<QuestionPrediction> predictions;

  std::vector<const BucketScore*> columns() const { return {&text_tf, &text_mc, &text_all, &diagram, &all}; }
  nlohmann::json to_json(bool with_predictions = false) const;
  // Header row of the column names, then one row of percentages ("-" for
  // empty buckets).
  std::string table() const;
};

EvalReport make_report(std::vector<QuestionPrediction> predictions);

// Cached, parameter-independent episodes for the questions of a split.
struct PreparedSplit {
  std::vector<Episode> episodes;
  std::vector<QuestionKind> kinds;
};

PreparedSplit prepare_split(const Corpus& corpus, Split split, const ModelConfig& config);

EvalReport evaluate_prepared(const Model& model, const PreparedSplit& prepared);
EvalReport evaluate(const Model& model, const Corpus& corpus, Split split);

// Model with a vocabulary drawn from the corpus and word vectors from the
// configured file (random per-token vectors when none is given).
Model make_model(const Corpus& corpus, const RunConfig& config);

struct EpochRecord {
  std::size_t epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  EvalReport train;
  std::optional<EvalReport> val;

  nlohmann::json to_json() const;
};

// Return false to stop training after this epoch.
using EpochCallback = std::function<bool(const EpochRecord&, const Model&, const AdamState&)>;

struct TrainResult {
  std::vector<EpochRecord> history;
  AdamState optimizer;
  bool stopped_early = false;
};

// Supervised cross-entropy training on the train split with lr decayed per
// epoch. Val Text All drives early stopping when patience > 0.
TrainResult train_supervised(Model& model, const Corpus& corpus, const RunConfig& config,
                             const EpochCallback& on_epoch = {});

// Probabilities and the intermediate structures behind them. Throws
// UnknownQuestion.
nlohmann::json predict(const Model& model, const Corpus& corpus, const std::string& question_id);

// Finite-difference check of the whole scoring graph on tiny synthetic
// instances: each fusion variant with visual context and a question
// diagram, a two-candidate true/false episode, and a two-context
// comprehension task. Every parameter tensor is checked.
std::vector<GradcheckReport> gradcheck_model(std::uint64_t seed, double tolerance = 1e-3);

}  // namespace tqa
