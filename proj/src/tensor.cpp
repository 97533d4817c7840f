#include "tqa/tensor.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "tqa/errors.hpp"

namespace tqa {

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) out << (i ? "x" : "") << shape[i];
  out << ']';
  return out.str();
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  const auto n = shape_size(shape);
  return from(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
  if (values.size() != shape_size(shape)) {
    throw ShapeMismatch("tensor data length " + std::to_string(values.size()) +
                        " does not match shape " + shape_string(shape));
  }
  Tensor t;
  t.impl_ = std::make_shared<Impl>();
  t.impl_->shape = std::move(shape);
  t.impl_->value = std::move(values);
  t.set_requires_grad(requires_grad);
  return t;
}

Tensor Tensor::scalar(double value, bool requires_grad) { return from({1}, {value}, requires_grad); }

Tensor Tensor::row(std::vector<double> values, bool requires_grad) {
  const auto n = values.size();
  return from({1, n}, std::move(values), requires_grad);
}

const Shape& Tensor::shape() const { return impl_->shape; }

std::size_t Tensor::size() const { return impl_->value.size(); }

std::size_t Tensor::rows() const {
  const auto& s = shape();
  if (s.size() == 1) return 1;
  return s.empty() ? 1 : s[0];
}

std::size_t Tensor::cols() const {
  const auto& s = shape();
  if (s.empty()) return 1;
  return s.size() == 1 ? s[0] : size() / s[0];
}

std::span<double> Tensor::data() { return impl_->value; }
std::span<const double> Tensor::data() const { return impl_->value; }

double Tensor::item() const {
  if (size() != 1) throw NonScalarLoss("item() on tensor of shape " + shape_string(shape()));
  return impl_->value[0];
}

bool Tensor::requires_grad() const { return impl_ && impl_->requires_grad; }

void Tensor::set_requires_grad(bool value) {
  impl_->requires_grad = value;
  if (value && impl_->grad.size() != impl_->value.size()) impl_->grad.assign(impl_->value.size(), 0.0);
  if (!value) impl_->grad.clear();
}

std::span<double> Tensor::grad() const { return impl_->grad; }

void Tensor::zero_grad() { std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0); }

Tensor Tensor::clone() const {
  auto out = from(impl_->shape, impl_->value, impl_->requires_grad);
  if (impl_->requires_grad) out.impl_->grad = impl_->grad;
  return out;
}

void Tape::backward(Tensor& loss) {
  if (loss.size() != 1) throw NonScalarLoss("backward() needs a scalar loss, got " + shape_string(loss.shape()));
  if (!loss.requires_grad()) return;
  loss.grad()[0] += 1.0;
  for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) (*it)();
}

}  // namespace tqa
