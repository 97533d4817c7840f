#include "tqa/ssoc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tqa/errors.hpp"
#include "tqa/rng.hpp"
#include "tqa/trainer.hpp"

namespace tqa {

std::vector<SsocTask> generate_ssoc_tasks(const Corpus& corpus, Split split, std::uint64_t seed) {
  std::vector<SsocTask> tasks;
  LessonIndexCache indexes;
  for (const auto* lesson : corpus.lessons_in(split)) {
    const auto& index = indexes.get(*lesson);
    for (const auto& q : lesson->questions) {
      for (std::size_t k = 0; k < q.candidates.size(); ++k) {
        Rng rng(derive_seed(derive_seed(seed, q.id), k));
        const int drawn = static_cast<int>(uniform_int(rng, kSsocMinJ, kSsocMaxJ));
        SsocTask task;
        task.lesson_id = lesson->id;
        task.question_id = q.id;
        task.candidate_index = k;
        task.j = std::min(drawn, index.doc_count());
        for (const auto& r : index.top_j(retrieval_query(q.tokens, q.candidates[k].tokens), task.j)) {
          task.contexts.push_back(r.paragraph_id);
          task.scores.push_back(r.score);
        }
        tasks.push_back(std::move(task));
      }
    }
  }
  Rng rng(derive_seed(seed, "ssoc-task-order"));
  shuffle(tasks, rng);
  return tasks;
}

nlohmann::json ssoc_task_to_json(const SsocTask& task) {
  return {{"lesson_id", task.lesson_id}, {"question_id", task.question_id}, {"candidate_index", task.candidate_index},
          {"j", task.j},           {"contexts", task.contexts},           {"scores", task.scores},
          {"label", task.label}};
}

std::vector<std::size_t> ssoc_presentation_order(const SsocTask& task, std::uint64_t seed, bool shuffle_order) {
  std::vector<std::size_t> order(task.contexts.size());
  std::iota(order.begin(), order.end(), 0);
  if (shuffle_order) {
    Rng rng(derive_seed(derive_seed(seed, "ssoc-presentation:" + task.question_id), task.candidate_index));
    shuffle(order, rng);
  }
  return order;
}

Episode prepare_ssoc_episode(const Corpus& corpus, const SsocTask& task, const ModelConfig& config,
                             const std::vector<std::size_t>& order) {
  const auto ref = corpus.find_question(task.question_id);
  if (!ref) throw UnknownQuestion("ssoc task names unknown question " + task.question_id);
  const auto& q = *ref->question;
  const auto& candidate = q.candidates.at(task.candidate_index).tokens;
  if (order.size() != task.contexts.size()) throw ShapeMismatch("presentation order does not match task contexts");
  Episode episode;
  episode.question_id = task.question_id;
  episode.question_tokens = q.tokens;
  if (episode.question_tokens.size() > config.max_seq_len) episode.question_tokens.resize(config.max_seq_len);
  episode.allow_single_step = true;
  for (std::size_t slot = 0; slot < order.size(); ++slot) {
    const auto& id = task.contexts[order[slot]];
    const auto it = std::find_if(ref->lesson->paragraphs.begin(), ref->lesson->paragraphs.end(),
                                 [&](const Paragraph& p) { return p.id == id; });
    if (it == ref->lesson->paragraphs.end()) throw UnknownParagraph("ssoc task names unknown paragraph " + id);
    episode.steps.push_back(make_text_step(*it, q.tokens, candidate, config));
    if (order[slot] == task.label) episode.label = slot;
  }
  return episode;
}

std::vector<double> ssoc_forward(const Model& model, const Episode& episode) { return model.probabilities(episode); }

std::vector<Episode> ssoc_episodes(const Corpus& corpus, const std::vector<SsocTask>& tasks,
                                   const ModelConfig& config, int min_j, std::uint64_t seed, bool shuffle_order) {
  std::vector<Episode> out;
  for (const auto& t : tasks) {
    if (t.j < min_j) continue;
    out.push_back(prepare_ssoc_episode(corpus, t, config, ssoc_presentation_order(t, seed, shuffle_order)));
  }
  return out;
}

double episode_accuracy(const Model& model, const std::vector<Episode>& episodes) {
  if (episodes.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& e : episodes) correct += argmax(model.probabilities(e)) == e.label;
  return static_cast<double>(correct) / static_cast<double>(episodes.size());
}

std::vector<SsocEpochMetrics> pretrain_ssoc(Model& model, const Corpus& corpus, const std::vector<SsocTask>& tasks,
                                            const SsocConfig& config, AdamState& state,
                                            const SsocEpochCallback& on_epoch) {
  if (!(config.lr > 0.0)) throw ConfigError("lr must be positive");
  if (!(config.lr_decay > 0.0 && config.lr_decay <= 1.0)) throw ConfigError("lr_decay must be in (0, 1]");
  const auto episodes =
      ssoc_episodes(corpus, tasks, model.config(), config.min_j, config.seed, config.shuffle_contexts);
  std::vector<SsocEpochMetrics> history;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    state.lr = config.lr * std::pow(config.lr_decay, static_cast<double>(epoch));
    const auto stats = train_epoch(model, episodes, state, config.batch_size, derive_seed(config.seed, "ssoc"), epoch);
    SsocEpochMetrics m{epoch + 1, state.lr, stats.mean_loss, episode_accuracy(model, episodes), episodes.size()};
    history.push_back(m);
    if (on_epoch) on_epoch(m, state);
  }
  return history;
}

}  // namespace tqa
