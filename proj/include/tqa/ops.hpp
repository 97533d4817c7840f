#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "tqa/tensor.hpp"

// Differentiable operations. Each op computes its forward value eagerly and,
// when any input tracks gradients, records its backward closure on the tape.
// Matrix ops use the 2-D view of a tensor (rank-1 tensors are one row).
namespace tqa::ops {

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b);
Tensor transpose(Tape& tape, const Tensor& a);
Tensor add(Tape& tape, const Tensor& a, const Tensor& b);
// a [m x n] plus bias (n values) added to every row.
Tensor add_bias(Tape& tape, const Tensor& a, const Tensor& bias);
Tensor scale(Tape& tape, const Tensor& a, double factor);
Tensor mul(Tape& tape, const Tensor& a, const Tensor& b);

// axis 0 stacks rows, axis 1 joins columns.
Tensor concat(Tape& tape, std::span<const Tensor> parts, std::size_t axis);
Tensor slice(Tape& tape, const Tensor& a, std::size_t axis, std::size_t begin, std::size_t end);

Tensor tanh(Tape& tape, const Tensor& a);
Tensor sigmoid(Tape& tape, const Tensor& a);

// axis 0 normalizes each column over its rows, axis 1 each row over its
// columns. Rank-1 tensors normalize over all elements.
Tensor softmax(Tape& tape, const Tensor& a, std::size_t axis);
// Over all elements of a vector.
Tensor log_softmax(Tape& tape, const Tensor& logits);
Tensor cross_entropy(Tape& tape, const Tensor& logits, std::size_t target);

Tensor sum(Tape& tape, const Tensor& a);
Tensor mean_rows(Tape& tape, const Tensor& a);

// Valid 1-D convolution. x [T x C], weight [width*C x F], bias F values;
// output [(T - width + 1) x F].
Tensor conv1d(Tape& tape, const Tensor& x, const Tensor& weight, const Tensor& bias, std::size_t width);
// Column-wise max over the rows of x [T x F] -> [1 x F].
Tensor max_pool_over_time(Tape& tape, const Tensor& x);
// Element-wise max over a sequence of equally sized step vectors.
Tensor max_pool_stepwise(Tape& tape, std::span<const Tensor> steps);

// While alive, records the winning row of every max-pool column evaluated
// on this thread, in evaluation order. Lets finite-difference checks detect
// a perturbation that crosses a max-pool kink.
class ArgmaxTrace {
 public:
  ArgmaxTrace();
  ~ArgmaxTrace();
  ArgmaxTrace(const ArgmaxTrace&) = delete;
  ArgmaxTrace& operator=(const ArgmaxTrace&) = delete;

  const std::vector<std::size_t>& winners() const { return winners_; }
  static void note(const std::vector<std::size_t>& argmax);

 private:
  std::vector<std::size_t> winners_;
  ArgmaxTrace* previous_;
};

// Inverted dropout; identity when train is false.
Tensor dropout(Tape& tape, const Tensor& x, double keep_rate, std::uint64_t seed, bool train);

// Gathers rows of table [V x D] -> [L x D].
Tensor embedding_lookup(Tape& tape, const Tensor& table, std::span<const std::size_t> indices);

// Gate layout along the 4H axis: input, forget, candidate, output.
struct LstmWeights {
  Tensor input;      // [in x 4H]
  Tensor recurrent;  // [H x 4H]
  Tensor bias;       // [1 x 4H]

  std::size_t hidden() const { return recurrent.rows(); }
};

struct LstmState {
  Tensor h;
  Tensor c;
};

LstmState lstm_cell(Tape& tape, const Tensor& x, const Tensor& h_prev, const Tensor& c_prev,
                    const LstmWeights& weights);

// Runs over the first `length` rows of x [L x in] from a zero state and
// returns the hidden states [length x H].
Tensor lstm_sequence(Tape& tape, const Tensor& x, std::size_t length, const LstmWeights& weights);

// Forward pass over rows 0..length-1, backward pass over length-1..0; row s
// of the result is [h_fwd(s) ; h_bwd(s)], shape [length x 2H].
Tensor bilstm_sequence(Tape& tape, const Tensor& x, std::size_t length, const LstmWeights& forward,
                       const LstmWeights& backward);

}  // namespace tqa::ops
