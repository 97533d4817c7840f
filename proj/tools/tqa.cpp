#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "tqa/checkpoint.hpp"
#include "tqa/config.hpp"
#include "tqa/corpus.hpp"
#include "tqa/errors.hpp"
#include "tqa/gradcheck.hpp"
#include "tqa/harness.hpp"
#include "tqa/retrieval.hpp"
#include "tqa/ssoc.hpp"
#include "tqa/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tqa;

namespace {

RunConfig read_config(const std::string& path) {
  RunConfig config = path.empty() ? RunConfig{} : load_config(path);
  apply_environment(config);
  return config;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

// Model plus the configuration it was trained with.
Model model_from_checkpoint(const Corpus& corpus, const std::string& path) {
  const auto ck = load_checkpoint(path);
  auto config = parse_config(ck.config_text);
  config.train.embeddings.clear();
  Model model = make_model(corpus, config);
  model.load_parameters(ck);
  return model;
}

Split split_option(const std::string& name) {
  auto s = parse_split(name);
  if (!s) throw ConfigError("unknown split '" + name + "' (train, val, train+val, all)");
  return *s;
}

int run_synth(const SynthSpec& spec, std::uint64_t seed, const std::string& out) {
  save_corpus(generate_synthetic_corpus(spec, seed), out);
  std::cout << json{{"written", out}}.dump() << "\n";
  return 0;
}

int run_retrieve(const std::string& corpus_dir, const std::string& question_id, std::size_t candidate, int top,
                 const std::string& lesson_id) {
  const auto corpus = load_corpus(corpus_dir);
  const auto ref = corpus.find_question(question_id);
  if (!ref) throw UnknownQuestion("unknown question " + question_id);
  if (!lesson_id.empty() && ref->lesson->id != lesson_id)
    throw UnknownQuestion("question " + question_id + " is not in lesson " + lesson_id);
  const auto& q = *ref->question;
  if (candidate >= q.candidates.size())
    throw CandidateCountOutOfRange("question " + q.id + " has " + std::to_string(q.candidates.size()) + " candidates");
  const auto index = TfidfIndex::build(ref->lesson->paragraphs);
  int rank = 0;
  for (const auto& r : index.top_j(retrieval_query(q.tokens, q.candidates[candidate].tokens), top))
    std::cout << json{{"rank", rank++}, {"paragraph_id", r.paragraph_id}, {"score", r.score}}.dump() << "\n";
  return 0;
}

int run_build_graphs(const std::string& corpus_dir, const std::string& config_path, const std::string& out) {
  const auto corpus = load_corpus(corpus_dir);
  const auto config = read_config(config_path);
  fs::create_directories(out);
  LessonIndexCache indexes;
  std::size_t written = 0;
  for (const auto& ref : corpus.questions_in(Split::All)) {
    const auto& q = *ref.question;
    const auto episode = prepare_qa_episode(*ref.lesson, q, indexes.get(*ref.lesson), config.model);
    for (std::size_t k = 0; k < episode.steps.size(); ++k) {
      const auto& step = episode.steps[k];
      auto j = graph_to_json(step.textual);
      j["paragraph_id"] = step.paragraph_id;
      open_out(fs::path(out) / (q.id + "__" + std::to_string(k) + ".json")) << j.dump(1) << "\n";
      ++written;
      if (step.visual) {
        auto v = graph_to_json(*step.visual);
        v["diagram_id"] = step.visual_id;
        open_out(fs::path(out) / (q.id + "__" + std::to_string(k) + "__visual.json")) << v.dump(1) << "\n";
        ++written;
      }
    }
    if (episode.question_diagram) {
      open_out(fs::path(out) / (q.id + "__question_diagram.json")) << graph_to_json(*episode.question_diagram).dump(1)
                                                                   << "\n";
      ++written;
    }
  }
  std::cout << json{{"graphs", written}, {"out", out}}.dump() << "\n";
  return 0;
}

int run_pretrain(const std::string& corpus_dir, const std::string& config_path, const std::string& out,
                 const std::string& dump_tasks) {
  const auto corpus = load_corpus(corpus_dir);
  const auto config = read_config(config_path);
  const auto tasks = generate_ssoc_tasks(corpus, config.train.ssoc_split, config.train.seed);
  if (!dump_tasks.empty()) {
    auto f = open_out(dump_tasks);
    for (const auto& t : tasks) f << ssoc_task_to_json(t).dump() << "\n";
  }
  Model model = make_model(corpus, config);
  SsocConfig sc;
  sc.epochs = config.train.ssoc_epochs;
  sc.min_j = config.train.min_j;
  sc.lr = config.train.lr;
  sc.lr_decay = config.train.lr_decay;
  sc.batch_size = config.train.batch_size;
  sc.seed = config.train.seed;
  sc.shuffle_contexts = config.train.ssoc_shuffle_contexts;
  AdamState state;
  const auto text = format_config(config);
  pretrain_ssoc(model, corpus, tasks, sc, state, [&](const SsocEpochMetrics& m, const AdamState& s) {
    save_checkpoint(out + ".epoch" + std::to_string(m.epoch), model.to_checkpoint(text, s));
    std::cout << json{{"epoch", m.epoch}, {"lr", m.lr}, {"train_loss", m.train_loss}, {"task_accuracy", m.accuracy},
                      {"tasks", m.tasks}}
                     .dump()
              << "\n";
  });
  save_checkpoint(out, model.to_checkpoint(text, state));
  return 0;
}

int run_train(const std::string& corpus_dir, const std::string& config_path, const std::string& out) {
  const auto corpus = load_corpus(corpus_dir);
  const auto config = read_config(config_path);
  Model model = make_model(corpus, config);
  if (!config.train.ssoc_checkpoint.empty()) model.load_parameters(load_checkpoint(config.train.ssoc_checkpoint));
  fs::create_directories(out);
  const auto text = format_config(config);
  open_out(fs::path(out) / "config.txt") << text;
  auto metrics = open_out(fs::path(out) / "metrics.jsonl");
  const auto result = train_supervised(model, corpus, config, [&](const EpochRecord& r, const Model& m, const AdamState& s) {
    const auto line = r.to_json().dump();
    metrics << line << "\n";
    metrics.flush();
    std::cout << line << "\n";
    save_checkpoint(fs::path(out) / ("epoch_" + std::to_string(r.epoch) + ".ckpt"), m.to_checkpoint(text, s));
    return true;
  });
  save_checkpoint(fs::path(out) / "final.ckpt", model.to_checkpoint(text, result.optimizer));
  if (!result.history.empty()) std::cout << result.history.back().train.table();
  return 0;
}

int run_eval(const std::string& corpus_dir, const std::string& checkpoint, const std::string& split, bool as_json,
             bool with_predictions) {
  const auto corpus = load_corpus(corpus_dir);
  const Model model = model_from_checkpoint(corpus, checkpoint);
  const auto report = evaluate(model, corpus, split_option(split));
  if (as_json)
    std::cout << report.to_json(with_predictions).dump() << "\n";
  else
    std::cout << report.table();
  return 0;
}

int run_predict(const std::string& corpus_dir, const std::string& checkpoint, const std::string& question_id) {
  const auto corpus = load_corpus(corpus_dir);
  const Model model = model_from_checkpoint(corpus, checkpoint);
  std::cout << predict(model, corpus, question_id).dump(1) << "\n";
  return 0;
}

int run_gradcheck(std::uint64_t seeds) {
  bool ok = true;
  for (std::uint64_t seed = 0; seed < seeds; ++seed) {
    auto reports = gradcheck_ops(seed);
    const auto model = gradcheck_model(seed);
    reports.insert(reports.end(), model.begin(), model.end());
    for (const auto& r : reports) {
      ok = ok && r.passed;
      std::cout << json{{"seed", seed}, {"check", r.name}, {"relative_error", r.relative_error}, {"skipped", r.skipped},
                      {"passed", r.passed}}
                       .dump()
                << "\n";
    }
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Textbook question answering over context graphs"};
  app.require_subcommand(1);

  SynthSpec spec;
  std::uint64_t seed = 0;
  std::string out, corpus, config, checkpoint, question, lesson, split = "val", dump_tasks;
  std::size_t candidate = 0;
  int top = 1;
  bool as_json = false, with_predictions = false;
  std::uint64_t seeds = 10;

  auto* synth = app.add_subcommand("synth", "Write a deterministic synthetic corpus");
  synth->add_option("--out", out, "Output corpus directory")->required();
  synth->add_option("--seed", seed, "Generator seed");
  synth->add_option("--vocab", spec.vocab_size, "Filler vocabulary size");
  synth->add_option("--lessons", spec.lessons, "Lesson count");
  synth->add_option("--paragraphs", spec.paragraphs_per_lesson, "Paragraphs per lesson");
  synth->add_option("--questions", spec.questions_per_lesson, "Questions per lesson");
  synth->add_option("--tf", spec.true_false_fraction, "True/false fraction");
  synth->add_option("--mc", spec.text_mc_fraction, "Text multiple-choice fraction");
  synth->add_option("--diagram", spec.diagram_fraction, "Diagram question fraction");
  synth->add_option("--val-lessons", spec.val_lessons, "Trailing lessons placed in val");
  synth->add_option("--filler", spec.filler_per_paragraph, "Filler tokens per paragraph");

  auto* retrieve = app.add_subcommand("retrieve", "Rank a lesson's paragraphs for [question ; candidate]");
  retrieve->add_option("--corpus", corpus)->required();
  retrieve->add_option("--lesson", lesson, "Lesson id (checked against the question)");
  retrieve->add_option("--question", question)->required();
  retrieve->add_option("--candidate", candidate)->required();
  retrieve->add_option("--top", top, "Number of paragraphs")->check(CLI::PositiveNumber);

  auto* graphs = app.add_subcommand("build-graphs", "Write the context graphs of every (question, candidate)");
  graphs->add_option("--corpus", corpus)->required();
  graphs->add_option("--config", config);
  graphs->add_option("--out", out)->required();

  auto* pretrain = app.add_subcommand("pretrain-ssoc", "Self-supervised context-ranking pretraining");
  pretrain->add_option("--corpus", corpus)->required();
  pretrain->add_option("--config", config);
  pretrain->add_option("--out", out, "Checkpoint path")->required();
  pretrain->add_option("--dump-tasks", dump_tasks, "Write generated tasks as JSON lines");

  auto* train = app.add_subcommand("train", "Supervised training");
  train->add_option("--corpus", corpus)->required();
  train->add_option("--config", config);
  train->add_option("--out", out, "Run directory")->required();

  auto* eval = app.add_subcommand("eval", "Accuracy by question type");
  eval->add_option("--corpus", corpus)->required();
  eval->add_option("--checkpoint", checkpoint)->required();
  eval->add_option("--split", split, "train, val, train+val or all");
  eval->add_flag("--json", as_json, "Print JSON instead of the table");
  eval->add_flag("--predictions", with_predictions, "Include per-question predictions in JSON");

  auto* pred = app.add_subcommand("predict", "Score one question and dump the explanation");
  pred->add_option("--corpus", corpus)->required();
  pred->add_option("--checkpoint", checkpoint)->required();
  pred->add_option("--question", question)->required();

  auto* grad = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
  grad->add_option("--seeds", seeds, "Number of seeds");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*synth) return run_synth(spec, seed, out);
    if (*retrieve) return run_retrieve(corpus, question, candidate, top, lesson);
    if (*graphs) return run_build_graphs(corpus, config, out);
    if (*pretrain) return run_pretrain(corpus, config, out, dump_tasks);
    if (*train) return run_train(corpus, config, out);
    if (*eval) return run_eval(corpus, checkpoint, split, as_json, with_predictions);
    if (*pred) return run_predict(corpus, checkpoint, question);
    if (*grad) return run_gradcheck(seeds);
  } catch (const tqa::Error& e) {
    std::cerr << "tqa: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
