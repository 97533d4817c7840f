#include "tqa/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tqa/errors.hpp"
#include "tqa/rng.hpp"

namespace tqa::ops {
namespace {

// C[m x n] += A[m x k] * B[k x n]
void mm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      if (av == 0.0) continue;
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// C[m x k] += A[m x n] * B[k x n]^T
void mm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t n, std::size_t k) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double* brow = b + p * n;
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += arow[j] * brow[j];
      c[i * k + p] += acc;
    }
  }
}

// C[k x n] += A[m x k]^T * B[m x n]
void mm_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* brow = b + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      if (av == 0.0) continue;
      double* crow = c + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

Tensor output(Shape shape, bool requires_grad) { return Tensor::zeros(std::move(shape), requires_grad); }

void require(bool ok, const char* op, const std::string& detail) {
  if (!ok) throw ShapeMismatch(std::string(op) + ": " + detail);
}

double sigmoid_value(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b) {
  const auto m = a.rows(), k = a.cols(), n = b.cols();
  require(b.rows() == k, "matmul", shape_string(a.shape()) + " x " + shape_string(b.shape()));
  auto out = output({m, n}, a.requires_grad() || b.requires_grad());
  mm_nn(a.data().data(), b.data().data(), out.data().data(), m, k, n);
  if (out.requires_grad()) {
    tape.record([a, b, out, m, k, n]() mutable {
      if (a.requires_grad()) mm_nt(out.grad().data(), b.data().data(), a.grad().data(), m, n, k);
      if (b.requires_grad()) mm_tn(a.data().data(), out.grad().data(), b.grad().data(), m, k, n);
    });
  }
  return out;
}

Tensor transpose(Tape& tape, const Tensor& a) {
  const auto m = a.rows(), n = a.cols();
  auto out = output({n, m}, a.requires_grad());
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = a[i * n + j];
  if (out.requires_grad()) {
    tape.record([a, out, m, n]() mutable {
      auto ga = a.grad();
      auto go = out.grad();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) ga[i * n + j] += go[j * m + i];
    });
  }
  return out;
}

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
  require(a.size() == b.size(), "add", shape_string(a.shape()) + " + " + shape_string(b.shape()));
  auto out = output(a.shape(), a.requires_grad() || b.requires_grad());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  if (out.requires_grad()) {
    tape.record([a, b, out]() mutable {
      auto go = out.grad();
      if (a.requires_grad())
        for (std::size_t i = 0; i < go.size(); ++i) a.grad()[i] += go[i];
      if (b.requires_grad())
        for (std::size_t i = 0; i < go.size(); ++i) b.grad()[i] += go[i];
    });
  }
  return out;
}

Tensor add_bias(Tape& tape, const Tensor& a, const Tensor& bias) {
  const auto m = a.rows(), n = a.cols();
  require(bias.size() == n, "add_bias", shape_string(a.shape()) + " + " + shape_string(bias.shape()));
  auto out = output(a.shape(), a.requires_grad() || bias.requires_grad());
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = a[i * n + j] + bias[j];
  if (out.requires_grad()) {
    tape.record([a, bias, out, m, n]() mutable {
      auto go = out.grad();
      if (a.requires_grad())
        for (std::size_t i = 0; i < go.size(); ++i) a.grad()[i] += go[i];
      if (bias.requires_grad())
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < n; ++j) bias.grad()[j] += go[i * n + j];
    });
  }
  return out;
}

Tensor scale(Tape& tape, const Tensor& a, double factor) {
  auto out = output(a.shape(), a.requires_grad());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * factor;
  if (out.requires_grad()) {
    tape.record([a, out, factor]() mutable {
      auto go = out.grad();
      for (std::size_t i = 0; i < go.size(); ++i) a.grad()[i] += go[i] * factor;
    });
  }
  return out;
}

Tensor mul(Tape& tape, const Tensor& a, const Tensor& b) {
  require(a.size() == b.size(), "mul", shape_string(a.shape()) + " * " + shape_string(b.shape()));
  auto out = output(a.shape(), a.requires_grad() || b.requires_grad());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  if (out.requires_grad()) {
    tape.record([a, b, out]() mutable {
      auto go = out.grad();
      if (a.requires_grad())
        for (std::size_t i = 0; i < go.size(); ++i) a.grad()[i] += go[i] * b[i];
      if (b.requires_grad())
        for (std::size_t i = 0; i < go.size(); ++i) b.grad()[i] += go[i] * a[i];
    });
  }
  return out;
}

Tensor concat(Tape& tape, std::span<const Tensor> parts, std::size_t axis) {
  require(!parts.empty(), "concat", "no inputs");
  require(axis < 2, "concat", "axis must be 0 or 1");
  bool rg = false;
  std::vector<Tensor> inputs(parts.begin(), parts.end());
  if (axis == 0) {
    const auto n = inputs[0].cols();
    std::size_t m = 0;
    for (const auto& p : inputs) {
      require(p.cols() == n, "concat", "column mismatch " + shape_string(p.shape()));
      m += p.rows();
      rg = rg || p.requires_grad();
    }
    auto out = output({m, n}, rg);
    std::size_t offset = 0;
    for (const auto& p : inputs) {
      std::copy(p.data().begin(), p.data().end(), out.data().begin() + static_cast<std::ptrdiff_t>(offset));
      offset += p.size();
    }
    if (rg) {
      tape.record([inputs, out]() mutable {
        std::size_t off = 0;
        auto go = out.grad();
        for (auto& p : inputs) {
          if (p.requires_grad())
            for (std::size_t i = 0; i < p.size(); ++i) p.grad()[i] += go[off + i];
          off += p.size();
        }
      });
    }
    return out;
  }
  const auto m = inputs[0].rows();
  std::size_t n = 0;
  for (const auto& p : inputs) {
    require(p.rows() == m, "concat", "row mismatch " + shape_string(p.shape()));
    n += p.cols();
    rg = rg || p.requires_grad();
  }
  auto out = output({m, n}, rg);
  std::size_t col = 0;
  for (const auto& p : inputs) {
    const auto pc = p.cols();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < pc; ++j) out[i * n + col + j] = p[i * pc + j];
    col += pc;
  }
  if (rg) {
    tape.record([inputs, out, m, n]() mutable {
      std::size_t c0 = 0;
      auto go = out.grad();
      for (auto& p : inputs) {
        const auto pc = p.cols();
        if (p.requires_grad())
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < pc; ++j) p.grad()[i * pc + j] += go[i * n + c0 + j];
        c0 += pc;
      }
    });
  }
  return out;
}

Tensor slice(Tape& tape, const Tensor& a, std::size_t axis, std::size_t begin, std::size_t end) {
  const auto m = a.rows(), n = a.cols();
  require(axis < 2, "slice", "axis must be 0 or 1");
  require(begin <= end && end <= (axis == 0 ? m : n), "slice", "range out of bounds for " + shape_string(a.shape()));
  const auto r0 = axis == 0 ? begin : 0, r1 = axis == 0 ? end : m;
  const auto c0 = axis == 1 ? begin : 0, c1 = axis == 1 ? end : n;
  const auto om = r1 - r0, on = c1 - c0;
  auto out = output({om, on}, a.requires_grad());
  for (std::size_t i = 0; i < om; ++i)
    for (std::size_t j = 0; j < on; ++j) out[i * on + j] = a[(r0 + i) * n + c0 + j];
  if (out.requires_grad()) {
    tape.record([a, out, r0, c0, om, on, n]() mutable {
      auto go = out.grad();
      for (std::size_t i = 0; i < om; ++i)
        for (std::size_t j = 0; j < on; ++j) a.grad()[(r0 + i) * n + c0 + j] += go[i * on + j];
    });
  }
  return out;
}

Tensor tanh(Tape& tape, const Tensor& a) {
  auto out = output(a.shape(), a.requires_grad());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::tanh(a[i]);
  if (out.requires_grad()) {
    tape.record([a, out]() mutable {
      auto go = out.grad();
      for (std::size_t i = 0; i < go.size(); ++i) a.grad()[i] += go[i] * (1.0 - out[i] * out[i]);
    });
  }
  return out;
}

Tensor sigmoid(Tape& tape, const Tensor& a) {
  auto out = output(a.shape(), a.requires_grad());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = sigmoid_value(a[i]);
  if (out.requires_grad()) {
    tape.record([a, out]() mutable {
      auto go = out.grad();
      for (std::size_t i = 0; i < go.size(); ++i) a.grad()[i] += go[i] * out[i] * (1.0 - out[i]);
    });
  }
  return out;
}

Tensor softmax(Tape& tape, const Tensor& a, std::size_t axis) {
  require(axis < 2, "softmax", "axis must be 0 or 1");
  if (a.rank() == 1) axis = 1;
  const auto m = a.rows(), n = a.cols();
  // Groups: axis 1 -> each row (stride 1), axis 0 -> each column (stride n).
  const auto groups = axis == 1 ? m : n;
  const auto len = axis == 1 ? n : m;
  auto index = [=](std::size_t g, std::size_t e) { return axis == 1 ? g * n + e : e * n + g; };
  auto out = output(a.shape(), a.requires_grad());
  for (std::size_t g = 0; g < groups; ++g) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < len; ++e) mx = std::max(mx, a[index(g, e)]);
    double total = 0.0;
    for (std::size_t e = 0; e < len; ++e) total += (out[index(g, e)] = std::exp(a[index(g, e)] - mx));
    for (std::size_t e = 0; e < len; ++e) out[index(g, e)] /= total;
  }
  if (out.requires_grad()) {
    tape.record([a, out, groups, len, index]() mutable {
      auto go = out.grad();
      for (std::size_t g = 0; g < groups; ++g) {
        double dot = 0.0;
        for (std::size_t e = 0; e < len; ++e) dot += go[index(g, e)] * out[index(g, e)];
        for (std::size_t e = 0; e < len; ++e) {
          const auto i = index(g, e);
          a.grad()[i] += out[i] * (go[i] - dot);
        }
      }
    });
  }
  return out;
}

Tensor log_softmax(Tape& tape, const Tensor& logits) {
  const auto n = logits.size();
  require(n > 0, "log_softmax", "empty input");
  auto out = output(logits.shape(), logits.requires_grad());
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) mx = std::max(mx, logits[i]);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += std::exp(logits[i] - mx);
  const double lse = mx + std::log(total);
  for (std::size_t i = 0; i < n; ++i) out[i] = logits[i] - lse;
  if (out.requires_grad()) {
    tape.record([logits, out, n]() mutable {
      auto go = out.grad();
      double gsum = 0.0;
      for (std::size_t i = 0; i < n; ++i) gsum += go[i];
      for (std::size_t i = 0; i < n; ++i) logits.grad()[i] += go[i] - std::exp(out[i]) * gsum;
    });
  }
  return out;
}

Tensor cross_entropy(Tape& tape, const Tensor& logits, std::size_t target) {
  require(target < logits.size(), "cross_entropy", "target index out of range");
  auto logp = log_softmax(tape, logits);
  auto out = output({1}, logp.requires_grad());
  out[0] = -logp[target];
  if (out.requires_grad()) {
    tape.record([logp, out, target]() mutable { logp.grad()[target] -= out.grad()[0]; });
  }
  return out;
}

Tensor sum(Tape& tape, const Tensor& a) {
  auto out = output({1}, a.requires_grad());
  double total = 0.0;
  for (double v : a.data()) total += v;
  out[0] = total;
  if (out.requires_grad()) {
    tape.record([a, out]() mutable {
      const double g = out.grad()[0];
      for (auto& v : a.grad()) v += g;
    });
  }
  return out;
}

Tensor mean_rows(Tape& tape, const Tensor& a) {
  const auto m = a.rows(), n = a.cols();
  require(m > 0, "mean_rows", "no rows");
  auto out = output({1, n}, a.requires_grad());
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j] += a[i * n + j] / static_cast<double>(m);
  if (out.requires_grad()) {
    tape.record([a, out, m, n]() mutable {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) a.grad()[i * n + j] += out.grad()[j] / static_cast<double>(m);
    });
  }
  return out;
}

Tensor conv1d(Tape& tape, const Tensor& x, const Tensor& weight, const Tensor& bias, std::size_t width) {
  const auto t = x.rows(), c = x.cols(), f = weight.cols();
  require(width > 0 && t >= width, "conv1d", "sequence shorter than kernel width");
  require(weight.rows() == width * c, "conv1d", "weight " + shape_string(weight.shape()));
  require(bias.size() == f, "conv1d", "bias " + shape_string(bias.shape()));
  const auto steps = t - width + 1;
  const auto window = width * c;
  auto out = output({steps, f}, x.requires_grad() || weight.requires_grad() || bias.requires_grad());
  // Window s is the contiguous run x[s*c .. s*c + width*c).
  for (std::size_t s = 0; s < steps; ++s) {
    for (std::size_t j = 0; j < f; ++j) out[s * f + j] = bias[j];
    mm_nn(x.data().data() + s * c, weight.data().data(), out.data().data() + s * f, 1, window, f);
  }
  if (out.requires_grad()) {
    tape.record([x, weight, bias, out, steps, c, f, window]() mutable {
      auto go = out.grad();
      for (std::size_t s = 0; s < steps; ++s) {
        const double* gs = go.data() + s * f;
        if (x.requires_grad()) mm_nt(gs, weight.data().data(), x.grad().data() + s * c, 1, f, window);
        if (weight.requires_grad()) mm_tn(x.data().data() + s * c, gs, weight.grad().data(), 1, window, f);
        if (bias.requires_grad())
          for (std::size_t j = 0; j < f; ++j) bias.grad()[j] += gs[j];
      }
    });
  }
  return out;
}

namespace {
thread_local ArgmaxTrace* active_trace = nullptr;
}

ArgmaxTrace::ArgmaxTrace() : previous_(active_trace) { active_trace = this; }
ArgmaxTrace::~ArgmaxTrace() { active_trace = previous_; }

void ArgmaxTrace::note(const std::vector<std::size_t>& argmax) {
  if (active_trace) active_trace->winners_.insert(active_trace->winners_.end(), argmax.begin(), argmax.end());
}

Tensor max_pool_over_time(Tape& tape, const Tensor& x) {
  const auto t = x.rows(), f = x.cols();
  require(t > 0, "max_pool_over_time", "empty sequence");
  auto out = output({1, f}, x.requires_grad());
  std::vector<std::size_t> argmax(f, 0);
  for (std::size_t j = 0; j < f; ++j) {
    double best = x[j];
    for (std::size_t s = 1; s < t; ++s) {
      if (x[s * f + j] > best) {
        best = x[s * f + j];
        argmax[j] = s;
      }
    }
    out[j] = best;
  }
  ArgmaxTrace::note(argmax);
  if (out.requires_grad()) {
    tape.record([x, out, argmax, f]() mutable {
      for (std::size_t j = 0; j < f; ++j) x.grad()[argmax[j] * f + j] += out.grad()[j];
    });
  }
  return out;
}

Tensor max_pool_stepwise(Tape& tape, std::span<const Tensor> steps) {
  require(!steps.empty(), "max_pool_stepwise", "empty sequence");
  const auto f = steps[0].size();
  std::vector<Tensor> inputs(steps.begin(), steps.end());
  bool rg = false;
  for (const auto& s : inputs) {
    require(s.size() == f, "max_pool_stepwise", "step size mismatch");
    rg = rg || s.requires_grad();
  }
  auto out = output({1, f}, rg);
  std::vector<std::size_t> argmax(f, 0);
  for (std::size_t j = 0; j < f; ++j) {
    double best = inputs[0][j];
    for (std::size_t s = 1; s < inputs.size(); ++s) {
      if (inputs[s][j] > best) {
        best = inputs[s][j];
        argmax[j] = s;
      }
    }
    out[j] = best;
  }
  ArgmaxTrace::note(argmax);
  if (rg) {
    tape.record([inputs, out, argmax, f]() mutable {
      for (std::size_t j = 0; j < f; ++j) {
        auto& src = inputs[argmax[j]];
        if (src.requires_grad()) src.grad()[j] += out.grad()[j];
      }
    });
  }
  return out;
}

Tensor dropout(Tape& tape, const Tensor& x, double keep_rate, std::uint64_t seed, bool train) {
  if (!train || keep_rate >= 1.0) return x;
  require(keep_rate > 0.0, "dropout", "keep rate must be positive");
  Rng rng(seed);
  std::vector<double> mask(x.size());
  for (auto& m : mask) m = uniform01(rng) < keep_rate ? 1.0 / keep_rate : 0.0;
  auto out = output(x.shape(), x.requires_grad());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * mask[i];
  if (out.requires_grad()) {
    tape.record([x, out, mask = std::move(mask)]() mutable {
      auto go = out.grad();
      for (std::size_t i = 0; i < go.size(); ++i) x.grad()[i] += go[i] * mask[i];
    });
  }
  return out;
}

Tensor embedding_lookup(Tape& tape, const Tensor& table, std::span<const std::size_t> indices) {
  const auto v = table.rows(), d = table.cols();
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  for (auto i : idx) require(i < v, "embedding_lookup", "index " + std::to_string(i) + " out of range");
  auto out = output({idx.size(), d}, table.requires_grad());
  for (std::size_t r = 0; r < idx.size(); ++r)
    std::copy_n(table.data().begin() + static_cast<std::ptrdiff_t>(idx[r] * d), d,
                out.data().begin() + static_cast<std::ptrdiff_t>(r * d));
  if (out.requires_grad()) {
    tape.record([table, out, idx = std::move(idx), d]() mutable {
      auto go = out.grad();
      for (std::size_t r = 0; r < idx.size(); ++r)
        for (std::size_t j = 0; j < d; ++j) table.grad()[idx[r] * d + j] += go[r * d + j];
    });
  }
  return out;
}

LstmState lstm_cell(Tape& tape, const Tensor& x, const Tensor& h_prev, const Tensor& c_prev,
                    const LstmWeights& w) {
  const auto in = x.size(), hid = w.hidden(), gates = 4 * hid;
  require(w.input.rows() == in && w.input.cols() == gates, "lstm_cell",
          "input weights " + shape_string(w.input.shape()) + " for input of size " + std::to_string(in));
  require(w.recurrent.cols() == gates, "lstm_cell", "recurrent weights " + shape_string(w.recurrent.shape()));
  require(w.bias.size() == gates, "lstm_cell", "bias " + shape_string(w.bias.shape()));
  require(h_prev.size() == hid && c_prev.size() == hid, "lstm_cell", "state size mismatch");

  std::vector<double> z(w.bias.data().begin(), w.bias.data().end());
  mm_nn(x.data().data(), w.input.data().data(), z.data(), 1, in, gates);
  mm_nn(h_prev.data().data(), w.recurrent.data().data(), z.data(), 1, hid, gates);
  std::vector<double> act(gates);
  for (std::size_t j = 0; j < hid; ++j) {
    act[j] = sigmoid_value(z[j]);
    act[hid + j] = sigmoid_value(z[hid + j]);
    act[2 * hid + j] = std::tanh(z[2 * hid + j]);
    act[3 * hid + j] = sigmoid_value(z[3 * hid + j]);
  }
  const bool rg = x.requires_grad() || h_prev.requires_grad() || c_prev.requires_grad() ||
                  w.input.requires_grad() || w.recurrent.requires_grad() || w.bias.requires_grad();
  auto h = output({1, hid}, rg);
  auto c = output({1, hid}, rg);
  std::vector<double> tanh_c(hid);
  for (std::size_t j = 0; j < hid; ++j) {
    c[j] = act[hid + j] * c_prev[j] + act[j] * act[2 * hid + j];
    tanh_c[j] = std::tanh(c[j]);
    h[j] = act[3 * hid + j] * tanh_c[j];
  }
  if (rg) {
    tape.record([x, h_prev, c_prev, w, h, c, act = std::move(act), tanh_c = std::move(tanh_c), in, hid,
                 gates]() mutable {
      auto gh = h.grad();
      auto gc = c.grad();
      std::vector<double> dz(gates);
      for (std::size_t j = 0; j < hid; ++j) {
        const double i = act[j], f = act[hid + j], g = act[2 * hid + j], o = act[3 * hid + j];
        const double dc = gc[j] + gh[j] * o * (1.0 - tanh_c[j] * tanh_c[j]);
        dz[j] = dc * g * i * (1.0 - i);
        dz[hid + j] = dc * c_prev[j] * f * (1.0 - f);
        dz[2 * hid + j] = dc * i * (1.0 - g * g);
        dz[3 * hid + j] = gh[j] * tanh_c[j] * o * (1.0 - o);
        if (c_prev.requires_grad()) c_prev.grad()[j] += dc * f;
      }
      if (x.requires_grad()) mm_nt(dz.data(), w.input.data().data(), x.grad().data(), 1, gates, in);
      if (h_prev.requires_grad())
        mm_nt(dz.data(), w.recurrent.data().data(), h_prev.grad().data(), 1, gates, hid);
      if (w.input.requires_grad()) mm_tn(x.data().data(), dz.data(), w.input.grad().data(), 1, in, gates);
      if (w.recurrent.requires_grad())
        mm_tn(h_prev.data().data(), dz.data(), w.recurrent.grad().data(), 1, hid, gates);
      if (w.bias.requires_grad())
        for (std::size_t j = 0; j < gates; ++j) w.bias.grad()[j] += dz[j];
    });
  }
  return {h, c};
}

Tensor lstm_sequence(Tape& tape, const Tensor& x, std::size_t length, const LstmWeights& weights) {
  require(length >= 1 && length <= x.rows(), "lstm_sequence", "length out of range");
  const auto hid = weights.hidden();
  LstmState state{Tensor::zeros({1, hid}), Tensor::zeros({1, hid})};
  std::vector<Tensor> hs;
  hs.reserve(length);
  for (std::size_t s = 0; s < length; ++s) {
    auto xs = slice(tape, x, 0, s, s + 1);
    state = lstm_cell(tape, xs, state.h, state.c, weights);
    hs.push_back(state.h);
  }
  return concat(tape, hs, 0);
}

Tensor bilstm_sequence(Tape& tape, const Tensor& x, std::size_t length, const LstmWeights& forward,
                       const LstmWeights& backward) {
  require(length >= 1 && length <= x.rows(), "bilstm_sequence", "length out of range");
  std::vector<Tensor> steps;
  steps.reserve(length);
  for (std::size_t s = 0; s < length; ++s) steps.push_back(slice(tape, x, 0, s, s + 1));

  std::vector<Tensor> fwd(length), bwd(length);
  LstmState state{Tensor::zeros({1, forward.hidden()}), Tensor::zeros({1, forward.hidden()})};
  for (std::size_t s = 0; s < length; ++s) {
    state = lstm_cell(tape, steps[s], state.h, state.c, forward);
    fwd[s] = state.h;
  }
  state = {Tensor::zeros({1, backward.hidden()}), Tensor::zeros({1, backward.hidden()})};
  for (std::size_t s = length; s-- > 0;) {
    state = lstm_cell(tape, steps[s], state.h, state.c, backward);
    bwd[s] = state.h;
  }
  std::vector<Tensor> rows;
  rows.reserve(length);
  for (std::size_t s = 0; s < length; ++s) {
    const Tensor pair[] = {fwd[s], bwd[s]};
    rows.push_back(concat(tape, pair, 1));
  }
  return concat(tape, rows, 0);
}

}  // namespace tqa::ops
