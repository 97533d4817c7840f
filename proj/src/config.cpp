#include "tqa/config.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "tqa/errors.hpp"

namespace tqa {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& value, const std::string& where) {
  std::istringstream in(value);
  T out{};
  in >> out;
  if (!in || !in.eof()) throw ConfigError(where + ": cannot parse '" + value + "'");
  return out;
}

std::size_t parse_size(const std::string& value, const std::string& where) {
  if (!value.empty() && value[0] == '-') throw ConfigError(where + ": expected a nonnegative integer");
  return parse_number<std::size_t>(value, where);
}

bool parse_bool(const std::string& value, const std::string& where) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError(where + ": expected true or false, got '" + value + "'");
}

std::string split_name(Split s) {
  switch (s) {
    case Split::Train:
      return "train";
    case Split::Val:
      return "val";
    case Split::TrainVal:
      return "train+val";
    case Split::All:
      return "all";
  }
  return "train+val";
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;
using Getter = std::function<std::string(const RunConfig&)>;

struct Key {
  Setter set;
  Getter get;
};

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

#define TQA_SIZE_KEY(name, field)                                                                        \
  {name, {[](RunConfig& c, const std::string& v, const std::string& w) { c.field = parse_size(v, w); }, \
          [](const RunConfig& c) { return std::to_string(c.field); }}}
#define TQA_INT_KEY(name, field)                                                                              \
  {name, {[](RunConfig& c, const std::string& v, const std::string& w) { c.field = parse_number<int>(v, w); }, \
          [](const RunConfig& c) { return std::to_string(c.field); }}}
#define TQA_REAL_KEY(name, field)                                                                                \
  {name, {[](RunConfig& c, const std::string& v, const std::string& w) { c.field = parse_number<double>(v, w); }, \
          [](const RunConfig& c) { return fmt(c.field); }}}
#define TQA_BOOL_KEY(name, field)                                                                        \
  {name, {[](RunConfig& c, const std::string& v, const std::string& w) { c.field = parse_bool(v, w); }, \
          [](const RunConfig& c) { return std::string(c.field ? "true" : "false"); }}}
#define TQA_TEXT_KEY(name, field)                                                                   \
  {name, {[](RunConfig& c, const std::string& v, const std::string&) { c.field = v; },            \
          [](const RunConfig& c) { return c.field; }}}

const std::map<std::string, Key>& keys() {
  static const std::map<std::string, Key> table = {
      TQA_SIZE_KEY("word_dim", model.word_dim),
      TQA_SIZE_KEY("char_emb_dim", model.char_emb_dim),
      TQA_SIZE_KEY("char_rep_dim", model.char_rep_dim),
      TQA_SIZE_KEY("char_kernel", model.char_kernel),
      TQA_SIZE_KEY("rnn_hidden", model.rnn_hidden),
      TQA_SIZE_KEY("gcn_dim", model.gcn_dim),
      TQA_SIZE_KEY("max_seq_len", model.max_seq_len),
      TQA_SIZE_KEY("max_candidates", model.max_candidates),
      TQA_INT_KEY("cap_textual", model.caps.textual),
      TQA_INT_KEY("cap_visual", model.caps.visual),
      TQA_INT_KEY("cap_question_diagram", model.caps.question_diagram),
      TQA_REAL_KEY("keep_rate", model.keep_rate),
      {"fusion_variant",
       {[](RunConfig& c, const std::string& v, const std::string& w) {
          auto f = parse_fusion_variant(v);
          if (!f) throw ConfigError(w + ": fusion_variant must be fgcn1, fgcn2 or text_only");
          c.model.fusion = *f;
        },
        [](const RunConfig& c) { return to_string(c.model.fusion); }}},
      TQA_BOOL_KEY("z_softmax", model.z_softmax),
      TQA_BOOL_KEY("relation_nodes", model.relation_nodes),
      TQA_BOOL_KEY("q_flag", model.q_flag),
      TQA_BOOL_KEY("a_flag", model.a_flag),
      TQA_REAL_KEY("lr", train.lr),
      TQA_REAL_KEY("lr_decay", train.lr_decay),
      TQA_SIZE_KEY("epochs", train.epochs),
      TQA_SIZE_KEY("batch_size", train.batch_size),
      {"seed",
       {[](RunConfig& c, const std::string& v, const std::string& w) {
          c.train.seed = parse_number<std::uint64_t>(v, w);
        },
        [](const RunConfig& c) { return std::to_string(c.train.seed); }}},
      TQA_SIZE_KEY("patience", train.patience),
      TQA_TEXT_KEY("embeddings", train.embeddings),
      TQA_TEXT_KEY("ssoc_checkpoint", train.ssoc_checkpoint),
      TQA_SIZE_KEY("ssoc_epochs", train.ssoc_epochs),
      {"ssoc_split",
       {[](RunConfig& c, const std::string& v, const std::string& w) {
          auto s = parse_split(v);
          if (!s || (*s != Split::Train && *s != Split::TrainVal))
            throw ConfigError(w + ": ssoc_split must be train or train+val");
          c.train.ssoc_split = *s;
        },
        [](const RunConfig& c) { return split_name(c.train.ssoc_split); }}},
      TQA_INT_KEY("min_j", train.min_j),
      TQA_BOOL_KEY("ssoc_shuffle_contexts", train.ssoc_shuffle_contexts),
  };
  return table;
}

void check(const RunConfig& c) {
  if (!(c.train.lr > 0.0)) throw ConfigError("lr must be positive");
  if (!(c.train.lr_decay > 0.0 && c.train.lr_decay <= 1.0)) throw ConfigError("lr_decay must be in (0, 1]");
  if (c.train.batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(c.model.keep_rate > 0.0 && c.model.keep_rate <= 1.0)) throw ConfigError("keep_rate must be in (0, 1]");
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig config;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto where = "config line " + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    auto it = keys().find(key);
    if (it == keys().end()) throw ConfigError(where + ": unknown key '" + key + "'");
    it->second.set(config, value, where);
  }
  check(config);
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string format_config(const RunConfig& config) {
  std::string out;
  for (const auto& [key, k] : keys()) out += key + " = " + k.get(config) + "\n";
  return out;
}

void apply_environment(RunConfig& config) {
  if (const char* seed = std::getenv("TQA_SEED"); seed && *seed)
    config.train.seed = parse_number<std::uint64_t>(seed, "TQA_SEED");
}

ModelConfig desk_model_config() {
  ModelConfig c;
  c.word_dim = 24;
  c.char_emb_dim = 8;
  c.char_rep_dim = 12;
  c.rnn_hidden = 24;
  c.gcn_dim = 24;
  return c;
}

}  // namespace tqa
