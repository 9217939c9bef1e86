#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "agcrn/errors.hpp"

namespace agcrn {

/// Extents of a dense tensor, row-major, rank 1..4.
using Shape = std::vector<std::size_t>;

std::string shape_str(const Shape& s);

/// Dense row-major array of 64-bit floats with shape metadata.
///
/// Plain value type: copy copies the buffer, moves are cheap. Rank is
/// restricted to 1..4 and every extent must be positive.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);  // zero-filled
  Tensor(Shape shape, std::vector<double> data);

  static Tensor scalar(double v);
  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
  static Tensor full(Shape shape, double v);
  static Tensor identity(std::size_t n);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t extent(std::size_t axis) const { return shape_[axis]; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  // Row-major indexed access; no bounds checks beyond debug asserts.
  double& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
  double at(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }
  double& at(std::size_t i, std::size_t j, std::size_t k) {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }
  double at(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }
  double& at(std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
    return data_[((i * shape_[1] + j) * shape_[2] + k) * shape_[3] + l];
  }
  double at(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
    return data_[((i * shape_[1] + j) * shape_[2] + k) * shape_[3] + l];
  }

  /// Value of a size-1 tensor.
  double item() const;

  /// Same buffer under a different shape; total size must match.
  Tensor reshaped(Shape shape) const;

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  void fill(double v);
  bool all_finite() const;

  /// Throws NumericsError naming `where` if any entry is NaN/Inf.
  void require_finite(const char* where) const;

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// Largest absolute elementwise difference; shapes must match.
double max_abs_diff(const Tensor& a, const Tensor& b);

/// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);

/// Parses a full string as a double; returns false on trailing garbage.
bool parse_double(std::string_view text, double& out);

}  // namespace agcrn
