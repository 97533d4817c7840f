#include "tqa/model.hpp"

#include <algorithm>
#include <cmath>

#include "tqa/errors.hpp"
#include "tqa/rng.hpp"

namespace tqa {

std::string to_string(FusionVariant variant) {
  switch (variant) {
    case FusionVariant::FGCN1:
      return "fgcn1";
    case FusionVariant::FGCN2:
      return "fgcn2";
    case FusionVariant::TextOnly:
      return "text_only";
  }
  return "fgcn2";
}

std::optional<FusionVariant> parse_fusion_variant(std::string_view name) {
  if (name == "fgcn1") return FusionVariant::FGCN1;
  if (name == "fgcn2") return FusionVariant::FGCN2;
  if (name == "text_only") return FusionVariant::TextOnly;
  return std::nullopt;
}

std::uint64_t ForwardContext::next_seed() { return derive_seed(seed, counter++); }

Tensor gcn_layer(Tape& tape, const Tensor& features, const Tensor& adjacency, const Tensor& weight) {
  if (adjacency.rows() != features.rows() || adjacency.cols() != features.rows())
    throw ShapeMismatch("gcn adjacency " + shape_string(adjacency.shape()) + " for features " +
                        shape_string(features.shape()));
  return ops::tanh(tape, ops::matmul(tape, adjacency, ops::matmul(tape, features, weight)));
}

Tensor fuse_fgcn1(Tape& tape, const Tensor& hct, const std::optional<Tensor>& hcd, bool z_softmax) {
  if (!hcd) {
    const Tensor parts[] = {hct, Tensor::zeros({hct.rows(), hct.cols()})};
    return ops::concat(tape, parts, 1);
  }
  if (hcd->cols() != hct.cols())
    throw ShapeMismatch("fusion widths differ: " + shape_string(hct.shape()) + " vs " + shape_string(hcd->shape()));
  auto g = ops::matmul(tape, *hcd, ops::transpose(tape, hct));
  auto z = z_softmax ? ops::softmax(tape, g, 0) : g;
  const Tensor parts[] = {hct, ops::matmul(tape, ops::transpose(tape, z), *hcd)};
  return ops::concat(tape, parts, 1);
}

Tensor fuse_fgcn2(Tape& tape, const Tensor& fused, const Tensor& adjacency, const Tensor& weight) {
  return gcn_layer(tape, fused, adjacency, weight);
}

Tensor attend(Tape& tape, const Tensor& h, const Tensor& context, const Tensor& m) {
  if (m.rows() != h.size() || m.cols() != context.cols())
    throw ShapeMismatch("attention matrix " + shape_string(m.shape()) + " for h " + shape_string(h.shape()) +
                        " and context " + shape_string(context.shape()));
  auto logits = ops::matmul(tape, ops::matmul(tape, h, m), ops::transpose(tape, context));
  return ops::matmul(tape, ops::softmax(tape, logits, 1), context);
}

Tensor adjacency_tensor(const ContextGraph& graph) {
  return Tensor::from({graph.size(), graph.size()}, graph.adjacency);
}

namespace {

Tensor xavier(std::size_t rows, std::size_t cols, std::uint64_t seed, const std::string& name) {
  Rng rng(derive_seed(seed, name));
  const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::vector<double> v(rows * cols);
  for (auto& x : v) x = uniform(rng, -a, a);
  return Tensor::from({rows, cols}, std::move(v), true);
}

ops::LstmWeights lstm(std::size_t in, std::size_t hidden, std::uint64_t seed, const std::string& name) {
  return {xavier(in, 4 * hidden, seed, name + ".input"), xavier(hidden, 4 * hidden, seed, name + ".recurrent"),
          Tensor::zeros({1, 4 * hidden}, true)};
}

void require_positive(const ModelConfig& c) {
  const std::size_t dims[] = {c.word_dim,   c.char_emb_dim, c.char_rep_dim,  c.char_kernel,
                              c.rnn_hidden, c.gcn_dim,      c.max_seq_len,   c.max_candidates};
  for (auto d : dims)
    if (d == 0) throw ConfigError("model dimensions must be positive");
  if (c.caps.textual < 1 || c.caps.visual < 1 || c.caps.question_diagram < 1)
    throw ConfigError("graph caps must be positive");
  if (!(c.keep_rate > 0.0 && c.keep_rate <= 1.0)) throw ConfigError("keep_rate must be in (0, 1]");
}

}  // namespace

Model::Model(ModelConfig config, Vocabulary vocabulary, const EmbeddingTable& embeddings, std::uint64_t seed)
    : config_(config), vocab_(std::move(vocabulary)) {
  require_positive(config_);
  if (embeddings.dim() != config_.word_dim)
    throw DimMismatch("embedding table has dim " + std::to_string(embeddings.dim()) + ", model expects " +
                      std::to_string(config_.word_dim));
  const auto& c = config_;
  std::vector<double> rows;
  rows.reserve(vocab_.size() * c.word_dim);
  for (const auto& t : vocab_.tokens()) {
    const auto v = embeddings.lookup(t);
    rows.insert(rows.end(), v.begin(), v.end());
  }
  auto& p = params_;
  p.word_emb = Tensor::from({vocab_.size(), c.word_dim}, std::move(rows), true);
  p.char_emb = xavier(kCharVocab, c.char_emb_dim, seed, "char_emb");
  p.char_conv_w = xavier(c.char_kernel * c.char_emb_dim, c.char_rep_dim, seed, "char_conv_w");
  p.char_conv_b = Tensor::zeros({1, c.char_rep_dim}, true);
  const auto node_dim = c.word_dim + c.char_rep_dim;
  p.gcn_wt = xavier(node_dim, c.gcn_dim, seed, "gcn_wt");
  p.gcn_wd = xavier(node_dim, c.gcn_dim, seed, "gcn_wd");
  p.gcn_wc = xavier(2 * c.gcn_dim, c.gcn_dim, seed, "gcn_wc");
  p.gcn_wqd = xavier(node_dim, c.gcn_dim, seed, "gcn_wqd");
  const auto token_dim = node_dim + 1;
  p.rnn_c_fwd = lstm(token_dim, c.rnn_hidden, seed, "rnn_c_fwd");
  p.rnn_c_bwd = lstm(token_dim, c.rnn_hidden, seed, "rnn_c_bwd");
  p.rnn_s = lstm(c.step_dim(), c.rnn_hidden, seed, "rnn_s");
  const auto h2 = 2 * c.rnn_hidden;
  p.att_qc = xavier(h2, c.context_dim(), seed, "att_qc");
  p.att_ac = xavier(h2, c.context_dim(), seed, "att_ac");
  p.att_qd = xavier(h2, c.gcn_dim, seed, "att_qd");
  p.att_ad = xavier(h2, c.gcn_dim, seed, "att_ad");
  p.cls_w = xavier(c.rnn_hidden, 1, seed, "cls_w");
  p.cls_b = Tensor::zeros({1, 1}, true);
}

std::vector<std::pair<std::string, Tensor>> Model::named_parameters() const {
  const auto& p = params_;
  std::vector<std::pair<std::string, Tensor>> out = {
      {"word_emb", p.word_emb}, {"char_emb", p.char_emb}, {"char_conv_w", p.char_conv_w},
      {"char_conv_b", p.char_conv_b}, {"gcn_wt", p.gcn_wt}, {"gcn_wd", p.gcn_wd},
      {"gcn_wc", p.gcn_wc}, {"gcn_wqd", p.gcn_wqd}};
  for (const auto& [name, w] : {std::pair{"rnn_c_fwd", &p.rnn_c_fwd}, std::pair{"rnn_c_bwd", &p.rnn_c_bwd},
                                std::pair{"rnn_s", &p.rnn_s}}) {
    out.emplace_back(std::string(name) + ".input", w->input);
    out.emplace_back(std::string(name) + ".recurrent", w->recurrent);
    out.emplace_back(std::string(name) + ".bias", w->bias);
  }
  out.insert(out.end(), {{"att_qc", p.att_qc}, {"att_ac", p.att_ac}, {"att_qd", p.att_qd}, {"att_ad", p.att_ad},
                         {"cls_w", p.cls_w}, {"cls_b", p.cls_b}});
  return out;
}

std::vector<Tensor> Model::parameters() const {
  std::vector<Tensor> out;
  for (auto& [_, t] : named_parameters()) out.push_back(t);
  return out;
}

void Model::zero_grad() {
  for (auto& t : parameters()) t.zero_grad();
}

void Model::fill(double value) {
  for (auto& t : parameters()) std::fill(t.data().begin(), t.data().end(), value);
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : parameters()) n += t.size();
  return n;
}

Tensor Model::char_cnn(Tape& tape, const std::string& token, ForwardContext& ctx) const {
  if (auto it = ctx.char_cache.find(token); it != ctx.char_cache.end()) return it->second;
  std::vector<std::size_t> chars;
  for (unsigned char ch : token) chars.push_back(static_cast<std::size_t>(ch) + 1);
  if (chars.size() < config_.char_kernel) chars.resize(config_.char_kernel, 0);
  auto embedded = ops::embedding_lookup(tape, params_.char_emb, chars);
  auto conv = ops::conv1d(tape, embedded, params_.char_conv_w, params_.char_conv_b, config_.char_kernel);
  auto rep = ops::max_pool_over_time(tape, conv);
  ctx.char_cache.emplace(token, rep);
  return rep;
}

Tensor Model::encode_tokens(Tape& tape, const Tokens& tokens, const std::set<std::string>& context_words, bool flag,
                            ForwardContext& ctx) const {
  const auto len = std::min(tokens.size(), config_.max_seq_len);
  if (len == 0) throw ShapeMismatch("cannot encode an empty token sequence");
  std::vector<std::size_t> ids;
  std::vector<Tensor> chars;
  std::vector<double> flags;
  for (std::size_t i = 0; i < len; ++i) {
    ids.push_back(vocab_.index(tokens[i]));
    chars.push_back(char_cnn(tape, tokens[i], ctx));
    flags.push_back(flag && context_words.count(tokens[i]) ? 1.0 : 0.0);
  }
  auto words = ops::dropout(tape, ops::embedding_lookup(tape, params_.word_emb, ids), config_.keep_rate,
                            ctx.next_seed(), ctx.train);
  const Tensor parts[] = {words, ops::concat(tape, chars, 0), Tensor::from({len, 1}, std::move(flags))};
  return ops::concat(tape, parts, 1);
}

Tensor Model::comprehend(Tape& tape, const Tensor& encoded) const {
  auto states = ops::bilstm_sequence(tape, encoded, encoded.rows(), params_.rnn_c_fwd, params_.rnn_c_bwd);
  return ops::max_pool_over_time(tape, states);
}

Tensor Model::node_features(Tape& tape, const ContextGraph& graph, ForwardContext& ctx) const {
  std::vector<std::size_t> ids;
  std::vector<Tensor> chars;
  bool single = true;
  for (const auto& words : graph.node_words) {
    single = single && words.size() == 1;
    for (const auto& w : words) {
      ids.push_back(vocab_.index(w));
      chars.push_back(char_cnn(tape, w, ctx));
    }
  }
  if (ids.empty()) throw ShapeMismatch("graph has no node words");
  auto emb = ops::dropout(tape, ops::embedding_lookup(tape, params_.word_emb, ids), config_.keep_rate,
                          ctx.next_seed(), ctx.train);
  const Tensor parts[] = {emb, ops::concat(tape, chars, 0)};
  auto per_word = ops::concat(tape, parts, 1);
  if (single) return per_word;
  std::vector<double> pool(graph.size() * ids.size(), 0.0);
  for (std::size_t node = 0, col = 0; node < graph.size(); ++node) {
    const auto n = graph.node_words[node].size();
    for (std::size_t k = 0; k < n; ++k) pool[node * ids.size() + col + k] = 1.0 / static_cast<double>(n);
    col += n;
  }
  return ops::matmul(tape, Tensor::from({graph.size(), ids.size()}, std::move(pool)), per_word);
}

Tensor Model::forward(Tape& tape, const Episode& episode, ForwardContext& ctx) const {
  const auto n = episode.steps.size();
  const std::size_t lo = episode.allow_single_step ? 1 : kMinCandidates;
  if (n < lo || n > config_.max_candidates)
    throw CandidateCountOutOfRange("episode " + episode.question_id + " has " + std::to_string(n) + " steps");
  const auto& p = params_;
  const auto& c = config_;

  std::optional<Tensor> hqd;
  if (episode.question_diagram && episode.question_diagram->size() > 0) {
    const auto& g = *episode.question_diagram;
    hqd = gcn_layer(tape, node_features(tape, g, ctx), adjacency_tensor(g), p.gcn_wqd);
  }
  const auto no_qd = Tensor::zeros({1, c.gcn_dim});

  std::vector<Tensor> inputs;
  for (const auto& step : episode.steps) {
    auto hq = comprehend(tape, encode_tokens(tape, episode.question_tokens, step.context_words, c.q_flag, ctx));
    auto ha = comprehend(tape, encode_tokens(tape, step.answer_tokens, step.context_words, c.a_flag, ctx));

    const auto at = adjacency_tensor(step.textual);
    auto hct = gcn_layer(tape, node_features(tape, step.textual, ctx), at, p.gcn_wt);
    Tensor hc = hct;
    if (c.fusion != FusionVariant::TextOnly) {
      std::optional<Tensor> hcd;
      if (step.visual && step.visual->size() > 0)
        hcd = gcn_layer(tape, node_features(tape, *step.visual, ctx), adjacency_tensor(*step.visual), p.gcn_wd);
      hc = fuse_fgcn1(tape, hct, hcd, c.z_softmax);
      if (c.fusion == FusionVariant::FGCN2) hc = fuse_fgcn2(tape, hc, at, p.gcn_wc);
    }

    std::vector<Tensor> parts = {hq, ha, attend(tape, hq, hc, p.att_qc), attend(tape, ha, hc, p.att_ac)};
    if (hqd) {
      parts.push_back(attend(tape, hq, *hqd, p.att_qd));
      parts.push_back(attend(tape, ha, *hqd, p.att_ad));
    } else {
      parts.push_back(no_qd);
      parts.push_back(no_qd);
    }
    inputs.push_back(ops::concat(tape, parts, 1));
  }
  auto sequence = ops::concat(tape, inputs, 0);
  auto states = ops::lstm_sequence(tape, sequence, n, p.rnn_s);
  auto logits = ops::add_bias(tape, ops::matmul(tape, states, p.cls_w), p.cls_b);
  return ops::transpose(tape, logits);
}

std::vector<double> Model::probabilities(const Episode& episode) const {
  Tape tape;
  ForwardContext ctx;
  auto probs = ops::softmax(tape, forward(tape, episode, ctx), 1);
  return {probs.data().begin(), probs.data().end()};
}

Checkpoint Model::to_checkpoint(const std::string& config_text, const std::optional<AdamState>& optimizer) const {
  Checkpoint ck;
  ck.config_text = config_text;
  ck.vocabulary = vocab_.tokens();
  for (const auto& [name, t] : named_parameters()) ck.params.emplace_back(name, t.clone());
  ck.optimizer = optimizer;
  return ck;
}

void Model::load_parameters(const Checkpoint& checkpoint) {
  std::map<std::string, const Tensor*> saved;
  for (const auto& [name, t] : checkpoint.params) saved[name] = &t;
  for (auto& [name, target] : named_parameters()) {
    auto it = saved.find(name);
    if (it == saved.end()) throw CheckpointError("checkpoint lacks parameter " + name);
    const auto& src = *it->second;
    if (name == "word_emb") {
      const auto d = config_.word_dim;
      if (src.cols() != d || src.rows() != checkpoint.vocabulary.size())
        throw CheckpointError("word_emb shape " + shape_string(src.shape()) + " does not match its vocabulary");
      for (std::size_t r = 0; r < checkpoint.vocabulary.size(); ++r) {
        const auto& token = checkpoint.vocabulary[r];
        if (!vocab_.contains(token)) continue;
        const auto row = vocab_.index(token);
        std::copy_n(src.data().begin() + static_cast<std::ptrdiff_t>(r * d), d,
                    target.data().begin() + static_cast<std::ptrdiff_t>(row * d));
      }
      continue;
    }
    if (src.shape() != target.shape())
      throw CheckpointError("parameter " + name + " has shape " + shape_string(src.shape()) + ", expected " +
                            shape_string(target.shape()));
    std::copy(src.data().begin(), src.data().end(), target.data().begin());
  }
}

}  // namespace tqa
