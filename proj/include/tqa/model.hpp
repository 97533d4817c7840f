#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tqa/checkpoint.hpp"
#include "tqa/embeddings.hpp"
#include "tqa/graphbuild.hpp"
#include "tqa/ops.hpp"

namespace tqa {

enum class FusionVariant { FGCN1, FGCN2, TextOnly };

std::string to_string(FusionVariant variant);
std::optional<FusionVariant> parse_fusion_variant(std::string_view name);

struct ModelConfig {
  std::size_t word_dim = 300;
  std::size_t char_emb_dim = 16;
  std::size_t char_rep_dim = 32;
  std::size_t char_kernel = 5;
  std::size_t rnn_hidden = 200;
  std::size_t gcn_dim = 200;
  std::size_t max_seq_len = 30;
  std::size_t max_candidates = 7;
  GraphCaps caps;
  double keep_rate = 0.5;
  FusionVariant fusion = FusionVariant::FGCN2;
  bool z_softmax = true;
  bool relation_nodes = false;
  bool q_flag = true;
  bool a_flag = true;

  // Width of the fused context features H_c.
  std::size_t context_dim() const { return fusion == FusionVariant::FGCN1 ? 2 * gcn_dim : gcn_dim; }
  // Width of one solving-sequence input I^k.
  std::size_t step_dim() const { return 4 * rnn_hidden + 2 * context_dim() + 2 * gcn_dim; }
};

// Parameter-free inputs for one scoring step: candidate k of a question, or
// context i of a comprehension task.
struct EpisodeStep {
  Tokens answer_tokens;
  std::string paragraph_id;
  std::vector<int> anchors;
  ContextGraph textual;
  std::optional<ContextGraph> visual;
  std::string visual_id;
  // Words that set the occurrence flag.
  std::set<std::string> context_words;
};

struct Episode {
  std::string question_id;
  Tokens question_tokens;
  std::vector<EpisodeStep> steps;
  std::optional<ContextGraph> question_diagram;
  std::size_t label = 0;
  // Comprehension tasks may have a single step.
  bool allow_single_step = false;
};

// Dropout settings and per-call caches for one forward pass.
struct ForwardContext {
  bool train = false;
  std::uint64_t seed = 0;
  std::uint64_t counter = 0;
  std::map<std::string, Tensor> char_cache;

  std::uint64_t next_seed();
};

// Differentiable building blocks.
Tensor gcn_layer(Tape& tape, const Tensor& features, const Tensor& adjacency, const Tensor& weight);
// [Hct ; Z^T Hcd] with Z = softmax over the visual axis of Hcd Hct^T (raw
// products when z_softmax is false). Without visual features the right half
// is zeros.
Tensor fuse_fgcn1(Tape& tape, const Tensor& hct, const std::optional<Tensor>& hcd, bool z_softmax = true);
Tensor fuse_fgcn2(Tape& tape, const Tensor& fused, const Tensor& adjacency, const Tensor& weight);
// sum_k softmax(h^T M Hc_k) Hc_k
Tensor attend(Tape& tape, const Tensor& h, const Tensor& context, const Tensor& m);
Tensor adjacency_tensor(const ContextGraph& graph);

class Model {
 public:
  struct Params {
    Tensor word_emb, char_emb, char_conv_w, char_conv_b;
    Tensor gcn_wt, gcn_wd, gcn_wc, gcn_wqd;
    ops::LstmWeights rnn_c_fwd, rnn_c_bwd, rnn_s;
    Tensor att_qc, att_ac, att_qd, att_ad;
    Tensor cls_w, cls_b;
  };

  static constexpr std::size_t kCharVocab = 257;

  // word_emb rows come from the table in vocabulary order; every other
  // weight is Xavier-uniform seeded by (seed, parameter name).
  Model(ModelConfig config, Vocabulary vocabulary, const EmbeddingTable& embeddings, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  const Vocabulary& vocabulary() const { return vocab_; }
  const Params& params() const { return params_; }
  std::vector<std::pair<std::string, Tensor>> named_parameters() const;
  std::vector<Tensor> parameters() const;
  void zero_grad();
  void fill(double value);
  std::size_t parameter_count() const;

  Tensor char_cnn(Tape& tape, const std::string& token, ForwardContext& ctx) const;
  // [emb ; char ; flag] rows for the first max_seq_len tokens.
  Tensor encode_tokens(Tape& tape, const Tokens& tokens, const std::set<std::string>& context_words, bool flag,
                       ForwardContext& ctx) const;
  Tensor comprehend(Tape& tape, const Tensor& encoded) const;
  // Node matrix C: [emb ; char] per node, averaged over multi-word names.
  Tensor node_features(Tape& tape, const ContextGraph& graph, ForwardContext& ctx) const;

  // Logits [1 x n] over the episode steps.
  Tensor forward(Tape& tape, const Episode& episode, ForwardContext& ctx) const;
  std::vector<double> probabilities(const Episode& episode) const;

  Checkpoint to_checkpoint(const std::string& config_text, const std::optional<AdamState>& optimizer) const;
  // Copies weights by name; word rows are matched by token so checkpoints
  // from a different vocabulary transfer the shared words. Throws
  // CheckpointError on missing names or shape mismatches.
  void load_parameters(const Checkpoint& checkpoint);

 private:
  ModelConfig config_;
  Vocabulary vocab_;
  Params params_;
};

}  // namespace tqa
