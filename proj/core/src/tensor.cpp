#include "agcrn/tensor.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace agcrn {

namespace {

std::size_t checked_size(const Shape& shape) {
  if (shape.empty() || shape.size() > 4) {
    throw ShapeError("tensor rank must be 1..4, got " + shape_str(shape));
  }
  std::size_t n = 1;
  for (std::size_t e : shape) {
    if (e == 0) {
      throw ShapeError("tensor extents must be positive, got " + shape_str(shape));
    }
    n *= e;
  }
  return n;
}

}  // namespace

std::string shape_str(const Shape& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i > 0) out += "x";
    out += std::to_string(s[i]);
  }
  out += "]";
  return out;
}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)), data_(checked_size(shape_), 0.0) {}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (checked_size(shape_) != data_.size()) {
    throw ShapeError("data length " + std::to_string(data_.size()) +
                     " does not match shape " + shape_str(shape_));
  }
}

Tensor Tensor::scalar(double v) { return Tensor({1}, {v}); }

Tensor Tensor::full(Shape shape, double v) {
  Tensor t(std::move(shape));
  t.fill(v);
  return t;
}

Tensor Tensor::identity(std::size_t n) {
  Tensor t({n, n});
  for (std::size_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
  return t;
}

double Tensor::item() const {
  if (size() != 1) {
    throw ShapeError("item() on tensor of shape " + shape_str(shape_));
  }
  return data_[0];
}

Tensor Tensor::reshaped(Shape shape) const {
  Tensor t;
  t.shape_ = std::move(shape);
  if (checked_size(t.shape_) != data_.size()) {
    throw ShapeError("cannot reshape " + shape_str(shape_) + " to " + shape_str(t.shape_));
  }
  t.data_ = data_;
  return t;
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

void Tensor::require_finite(const char* where) const {
  if (!all_finite()) {
    throw NumericsError(std::string("non-finite value produced by ") + where);
  }
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) {
    throw ShapeError("max_abs_diff shapes differ: " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  }
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::fabs(a[i] - b[i]));
  }
  return m;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

bool parse_double(std::string_view text, double& out) {
  if (text.empty()) return false;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto res = std::from_chars(first, last, out);
  return res.ec == std::errc{} && res.ptr == last;
}

}  // namespace agcrn
