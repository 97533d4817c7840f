#include "tqa/harness.hpp"

#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "tqa/errors.hpp"
#include "tqa/rng.hpp"
#include "tqa/trainer.hpp"

namespace tqa {

std::optional<double> BucketScore::accuracy() const {
  if (total == 0) return std::nullopt;
  return static_cast<double>(correct) / static_cast<double>(total);
}

EvalReport make_report(std::vector<QuestionPrediction> predictions) {
  EvalReport r;
  for (const auto& p : predictions) {
    const std::size_t hit = p.predicted == p.answer ? 1 : 0;
    auto add = [&](BucketScore& b) {
      b.correct += hit;
      ++b.total;
    };
    add(r.all);
    switch (p.kind) {
      case QuestionKind::TrueFalse:
        add(r.text_tf);
        add(r.text_all);
        break;
      case QuestionKind::TextMC:
        add(r.text_mc);
        add(r.text_all);
        break;
      case QuestionKind::Diagram:
        add(r.diagram);
        break;
    }
  }
  r.predictions = std::move(predictions);
  return r;
}

nlohmann::json EvalReport::to_json(bool with_predictions) const {
  nlohmann::json j = nlohmann::json::object();
  const char* keys[] = {"text_tf", "text_mc", "text_all", "diagram", "all"};
  const auto cols = columns();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    const auto acc = cols[i]->accuracy();
    j[keys[i]] = {{"accuracy", acc ? nlohmann::json(*acc) : nlohmann::json(nullptr)},
                  {"correct", cols[i]->correct},
                  {"count", cols[i]->total}};
  }
  if (with_predictions) {
    auto& out = j["predictions"] = nlohmann::json::array();
    for (const auto& p : predictions)
      out.push_back({{"question_id", p.question_id},
                     {"kind", to_string(p.kind)},
                     {"predicted", p.predicted},
                     {"answer", p.answer},
                     {"probabilities", p.probabilities}});
  }
  return j;
}

std::string EvalReport::table() const {
  std::ostringstream out;
  const auto cols = columns();
  for (std::size_t i = 0; i < kReportColumns.size(); ++i) out << (i ? "  " : "") << std::setw(9) << kReportColumns[i];
  out << "\n";
  for (std::size_t i = 0; i < cols.size(); ++i) {
    out << (i ? "  " : "");
    if (auto acc = cols[i]->accuracy()) {
      std::ostringstream cell;
      cell << std::fixed << std::setprecision(2) << 100.0 * *acc;
      out << std::setw(9) << cell.str();
    } else {
      out << std::setw(9) << "-";
    }
  }
  out << "\n";
  return out.str();
}

PreparedSplit prepare_split(const Corpus& corpus, Split split, const ModelConfig& config) {
  PreparedSplit out;
  LessonIndexCache indexes;
  for (const auto& ref : corpus.questions_in(split)) {
    out.episodes.push_back(prepare_qa_episode(*ref.lesson, *ref.question, indexes.get(*ref.lesson), config));
    out.kinds.push_back(ref.question->kind);
  }
  return out;
}

EvalReport evaluate_prepared(const Model& model, const PreparedSplit& prepared) {
  std::vector<QuestionPrediction> predictions;
  for (std::size_t i = 0; i < prepared.episodes.size(); ++i) {
    const auto& e = prepared.episodes[i];
    QuestionPrediction p;
    p.question_id = e.question_id;
    p.kind = prepared.kinds[i];
    p.probabilities = model.probabilities(e);
    p.predicted = argmax(p.probabilities);
    p.answer = e.label;
    predictions.push_back(std::move(p));
  }
  return make_report(std::move(predictions));
}

EvalReport evaluate(const Model& model, const Corpus& corpus, Split split) {
  return evaluate_prepared(model, prepare_split(corpus, split, model.config()));
}

Model make_model(const Corpus& corpus, const RunConfig& config) {
  const auto& c = config.train;
  const auto table = c.embeddings.empty()
                         ? EmbeddingTable(config.model.word_dim, OovPolicy::RandomInit, c.seed)
                         : load_embeddings(c.embeddings, config.model.word_dim, c.seed);
  return Model(config.model, Vocabulary::from_corpus(corpus), table, c.seed);
}

nlohmann::json EpochRecord::to_json() const {
  return {{"epoch", epoch},
          {"lr", lr},
          {"train_loss", train_loss},
          {"train", train.to_json()},
          {"val", val ? val->to_json() : nlohmann::json(nullptr)}};
}

TrainResult train_supervised(Model& model, const Corpus& corpus, const RunConfig& config,
                             const EpochCallback& on_epoch) {
  const auto& tc = config.train;
  if (!(tc.lr > 0.0)) throw ConfigError("lr must be positive");
  if (!(tc.lr_decay > 0.0 && tc.lr_decay <= 1.0)) throw ConfigError("lr_decay must be in (0, 1]");
  const auto train = prepare_split(corpus, Split::Train, model.config());
  const auto val = prepare_split(corpus, Split::Val, model.config());

  TrainResult result;
  result.optimizer.lr = tc.lr;
  double best = -1.0;
  std::size_t stale = 0;
  for (std::size_t epoch = 0; epoch < tc.epochs; ++epoch) {
    result.optimizer.lr = tc.lr * std::pow(tc.lr_decay, static_cast<double>(epoch));
    const auto stats = train_epoch(model, train.episodes, result.optimizer, tc.batch_size, tc.seed, epoch);
    EpochRecord record;
    record.epoch = epoch + 1;
    record.lr = result.optimizer.lr;
    record.train_loss = stats.mean_loss;
    record.train = evaluate_prepared(model, train);
    if (!val.episodes.empty()) record.val = evaluate_prepared(model, val);
    result.history.push_back(record);
    const bool keep_going = !on_epoch || on_epoch(record, model, result.optimizer);

    if (tc.patience > 0 && record.val) {
      const double score = record.val->text_all.accuracy().value_or(record.val->all.accuracy().value_or(0.0));
      if (score > best) {
        best = score;
        stale = 0;
      } else if (++stale >= tc.patience) {
        result.stopped_early = true;
        break;
      }
    }
    if (!keep_going) {
      result.stopped_early = true;
      break;
    }
  }
  return result;
}

nlohmann::json predict(const Model& model, const Corpus& corpus, const std::string& question_id) {
  const auto ref = corpus.find_question(question_id);
  if (!ref) throw UnknownQuestion("unknown question " + question_id);
  const auto& q = *ref->question;
  const auto& index = TfidfIndex::build(ref->lesson->paragraphs);
  const auto episode = prepare_qa_episode(*ref->lesson, q, index, model.config());
  const auto probs = model.probabilities(episode);

  nlohmann::json candidates = nlohmann::json::array();
  for (std::size_t k = 0; k < episode.steps.size(); ++k) {
    const auto& step = episode.steps[k];
    nlohmann::json anchors = nlohmann::json::array();
    const auto& para = *std::find_if(ref->lesson->paragraphs.begin(), ref->lesson->paragraphs.end(),
                                     [&](const Paragraph& p) { return p.id == step.paragraph_id; });
    for (int a : step.anchors) anchors.push_back({{"index", a}, {"token", para.tokens[static_cast<std::size_t>(a)]}});
    candidates.push_back({{"index", k},
                          {"tokens", step.answer_tokens},
                          {"probability", probs[k]},
                          {"paragraph_id", step.paragraph_id},
                          {"anchors", anchors},
                          {"subgraph", graph_to_json(step.textual)},
                          {"visual_context", step.visual ? nlohmann::json(step.visual_id) : nlohmann::json(nullptr)}});
  }
  std::vector<std::size_t> ranking(probs.size());
  std::iota(ranking.begin(), ranking.end(), 0);
  std::stable_sort(ranking.begin(), ranking.end(), [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });
  return {{"question_id", q.id},
          {"kind", to_string(q.kind)},
          {"question_tokens", episode.question_tokens},
          {"candidates", candidates},
          {"ranking", ranking},
          {"predicted_index", argmax(probs)},
          {"question_diagram",
           episode.question_diagram ? graph_to_json(*episode.question_diagram) : nlohmann::json(nullptr)}};
}

}  // namespace tqa
