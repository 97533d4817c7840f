#include "tqa/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "tqa/ops.hpp"
#include "tqa/rng.hpp"

namespace tqa {

namespace {

// Norms below this count as zero.
constexpr double kGradFloor = 1e-6;

std::vector<std::size_t> backward_and_trace(const std::function<Tensor(Tape&)>& loss_fn, std::span<Tensor> inputs) {
  for (auto& in : inputs) {
    in.set_requires_grad(true);
    in.zero_grad();
  }
  ops::ArgmaxTrace trace;
  Tape tape;
  auto loss = loss_fn(tape);
  tape.backward(loss);
  return trace.winners();
}

InputCheck check_input(const std::function<Tensor(Tape&)>& loss_fn, Tensor& in, const std::vector<std::size_t>& coords,
                       const std::vector<std::size_t>& winners, double step) {
  auto evaluate = [&](bool& same_branch) {
    ops::ArgmaxTrace trace;
    Tape tape;
    const double value = loss_fn(tape).item();
    same_branch = same_branch && trace.winners() == winners;
    return value;
  };
  const std::vector<double> analytic(in.grad().begin(), in.grad().end());
  InputCheck out;
  double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
  for (auto i : coords) {
    const double saved = in[i];
    bool same_branch = true;
    in[i] = saved + step;
    const double plus = evaluate(same_branch);
    in[i] = saved - step;
    const double minus = evaluate(same_branch);
    in[i] = saved;
    if (!same_branch) {
      ++out.skipped;
      continue;
    }
    ++out.checked;
    const double numeric = (plus - minus) / (2.0 * step);
    diff2 += (analytic[i] - numeric) * (analytic[i] - numeric);
    a2 += analytic[i] * analytic[i];
    n2 += numeric * numeric;
  }
  out.relative_error = std::sqrt(diff2) / std::max(std::sqrt(a2) + std::sqrt(n2), kGradFloor);
  return out;
}

}  // namespace

double gradcheck(const std::function<Tensor(Tape&)>& loss_fn, std::span<Tensor> inputs, double step) {
  const auto winners = backward_and_trace(loss_fn, inputs);
  double worst = 0.0;
  for (auto& in : inputs) {
    std::vector<std::size_t> coords(in.size());
    for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = i;
    worst = std::max(worst, check_input(loss_fn, in, coords, winners, step).relative_error);
  }
  return worst;
}

std::vector<InputCheck> gradcheck_sampled(const std::function<Tensor(Tape&)>& loss_fn, std::span<Tensor> inputs,
                                          std::size_t max_per_input, std::uint64_t seed, double step) {
  const auto winners = backward_and_trace(loss_fn, inputs);
  Rng rng(seed);
  std::vector<InputCheck> out;
  for (auto& in : inputs) {
    std::vector<std::size_t> coords;
    if (in.size() <= max_per_input) {
      for (std::size_t i = 0; i < in.size(); ++i) coords.push_back(i);
    } else {
      std::vector<std::size_t> live, dead;
      for (std::size_t i = 0; i < in.size(); ++i) (in.grad()[i] != 0.0 ? live : dead).push_back(i);
      shuffle(live, rng);
      shuffle(dead, rng);
      const auto take_dead = std::min(dead.size(), max_per_input / 4);
      const auto take_live = std::min(live.size(), max_per_input - take_dead);
      coords.assign(live.begin(), live.begin() + static_cast<std::ptrdiff_t>(take_live));
      coords.insert(coords.end(), dead.begin(), dead.begin() + static_cast<std::ptrdiff_t>(take_dead));
    }
    out.push_back(check_input(loss_fn, in, coords, winners, step));
  }
  return out;
}

namespace {

Tensor random_tensor(Rng& rng, Shape shape, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(shape_size(shape));
  for (auto& x : v) x = uniform(rng, lo, hi);
  return Tensor::from(std::move(shape), std::move(v), true);
}

// sum(out * weights) so every output element contributes a distinct sensitivity.
Tensor project(Tape& tape, const Tensor& out, const Tensor& weights) {
  return ops::sum(tape, ops::mul(tape, out, weights));
}

ops::LstmWeights random_lstm(Rng& rng, std::size_t in, std::size_t hid) {
  return {random_tensor(rng, {in, 4 * hid}, -0.5, 0.5), random_tensor(rng, {hid, 4 * hid}, -0.5, 0.5),
          random_tensor(rng, {1, 4 * hid}, -0.5, 0.5)};
}

}  // namespace

std::vector<GradcheckReport> gradcheck_ops(std::uint64_t seed, double tolerance) {
  Rng rng(derive_seed(seed, "gradcheck_ops"));
  std::vector<GradcheckReport> reports;
  auto run = [&](std::string name, const std::function<Tensor(Tape&)>& fn, std::vector<Tensor> inputs) {
    const double err = gradcheck(fn, inputs);
    reports.push_back({std::move(name), err, err < tolerance});
  };
  auto weights_for = [&](Shape shape) {
    auto w = random_tensor(rng, std::move(shape));
    w.set_requires_grad(false);
    return w;
  };

  {
    auto a = random_tensor(rng, {3, 4}), b = random_tensor(rng, {4, 2});
    auto r = weights_for({3, 2});
    run("matmul", [=](Tape& t) { return project(t, ops::matmul(t, a, b), r); }, {a, b});
  }
  {
    auto a = random_tensor(rng, {3, 4});
    auto r = weights_for({4, 3});
    run("transpose", [=](Tape& t) { return project(t, ops::transpose(t, a), r); }, {a});
  }
  {
    auto a = random_tensor(rng, {2, 3}), b = random_tensor(rng, {2, 3});
    auto r = weights_for({2, 3});
    run("add", [=](Tape& t) { return project(t, ops::add(t, a, b), r); }, {a, b});
    run("mul", [=](Tape& t) { return project(t, ops::mul(t, a, b), r); }, {a, b});
    run("scale", [=](Tape& t) { return project(t, ops::scale(t, a, -1.7), r); }, {a});
    run("tanh", [=](Tape& t) { return project(t, ops::tanh(t, a), r); }, {a});
    run("sigmoid", [=](Tape& t) { return project(t, ops::sigmoid(t, a), r); }, {a});
    run("softmax_axis0", [=](Tape& t) { return project(t, ops::softmax(t, a, 0), r); }, {a});
    run("softmax_axis1", [=](Tape& t) { return project(t, ops::softmax(t, a, 1), r); }, {a});
    run("sum", [=](Tape& t) { return ops::sum(t, ops::mul(t, a, b)); }, {a, b});
    auto rm = weights_for({1, 3});
    run("mean_rows", [=](Tape& t) { return project(t, ops::mean_rows(t, a), rm); }, {a});
    auto bias = random_tensor(rng, {1, 3});
    run("add_bias", [=](Tape& t) { return project(t, ops::add_bias(t, a, bias), r); }, {a, bias});
  }
  {
    auto a = random_tensor(rng, {2, 3}), b = random_tensor(rng, {1, 3}), c = random_tensor(rng, {2, 2});
    auto r0 = weights_for({3, 3}), r1 = weights_for({2, 5});
    run("concat_rows", [=](Tape& t) {
      const Tensor parts[] = {a, b};
      return project(t, ops::concat(t, parts, 0), r0);
    }, {a, b});
    run("concat_cols", [=](Tape& t) {
      const Tensor parts[] = {a, c};
      return project(t, ops::concat(t, parts, 1), r1);
    }, {a, c});
    auto rs = weights_for({2, 2});
    run("slice", [=](Tape& t) { return project(t, ops::slice(t, a, 1, 1, 3), rs); }, {a});
  }
  {
    auto logits = random_tensor(rng, {1, 5}, -2.0, 2.0);
    auto r = weights_for({1, 5});
    run("log_softmax", [=](Tape& t) { return project(t, ops::log_softmax(t, logits), r); }, {logits});
    run("cross_entropy", [=](Tape& t) { return ops::cross_entropy(t, logits, 3); }, {logits});
  }
  {
    auto x = random_tensor(rng, {7, 3}), w = random_tensor(rng, {5 * 3, 4}), b = random_tensor(rng, {1, 4});
    auto r = weights_for({3, 4});
    run("conv1d", [=](Tape& t) { return project(t, ops::conv1d(t, x, w, b, 5), r); }, {x, w, b});
    auto rp = weights_for({1, 3});
    run("max_pool_over_time", [=](Tape& t) { return project(t, ops::max_pool_over_time(t, x), rp); }, {x});
  }
  {
    auto s0 = random_tensor(rng, {1, 4}), s1 = random_tensor(rng, {1, 4}), s2 = random_tensor(rng, {1, 4});
    auto r = weights_for({1, 4});
    run("max_pool_stepwise", [=](Tape& t) {
      const Tensor steps[] = {s0, s1, s2};
      return project(t, ops::max_pool_stepwise(t, steps), r);
    }, {s0, s1, s2});
  }
  {
    auto x = random_tensor(rng, {3, 4});
    auto r = weights_for({3, 4});
    const auto mask_seed = rng();
    run("dropout", [=](Tape& t) { return project(t, ops::dropout(t, x, 0.5, mask_seed, true), r); }, {x});
  }
  {
    auto table = random_tensor(rng, {5, 3});
    auto r = weights_for({4, 3});
    const std::vector<std::size_t> idx = {2, 0, 2, 4};
    run("embedding_lookup", [=](Tape& t) { return project(t, ops::embedding_lookup(t, table, idx), r); }, {table});
  }
  {
    auto w = random_lstm(rng, 3, 2);
    auto x = random_tensor(rng, {1, 3}), h = random_tensor(rng, {1, 2}), c = random_tensor(rng, {1, 2});
    auto rh = weights_for({1, 2}), rc = weights_for({1, 2});
    run("lstm_cell", [=](Tape& t) {
      auto s = ops::lstm_cell(t, x, h, c, w);
      return ops::add(t, project(t, s.h, rh), project(t, s.c, rc));
    }, {x, h, c, w.input, w.recurrent, w.bias});
  }
  {
    auto w = random_lstm(rng, 3, 2);
    auto x = random_tensor(rng, {4, 3});
    auto r = weights_for({3, 2});
    run("lstm_sequence", [=](Tape& t) { return project(t, ops::lstm_sequence(t, x, 3, w), r); },
        {x, w.input, w.recurrent, w.bias});
  }
  {
    auto fw = random_lstm(rng, 3, 2), bw = random_lstm(rng, 3, 2);
    auto x = random_tensor(rng, {4, 3});
    auto r = weights_for({4, 4});
    run("bilstm_sequence", [=](Tape& t) { return project(t, ops::bilstm_sequence(t, x, 4, fw, bw), r); },
        {x, fw.input, fw.recurrent, fw.bias, bw.input, bw.recurrent, bw.bias});
  }
  return reports;
}

}  // namespace tqa
