#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "spikescan/error.hpp"

namespace spikescan {

// Extents of a rank-0..3 array. Rank-3 tensors are laid out batch x channel x
// time with time innermost.
class Shape {
 public:
  Shape() = default;
  Shape(std::initializer_list<std::size_t> extents);
  explicit Shape(std::span<const std::size_t> extents);

  std::size_t rank() const { return rank_; }
  std::size_t operator[](std::size_t axis) const;
  std::size_t numel() const;
  std::span<const std::size_t> extents() const { return {dims_.data(), rank_}; }

  bool operator==(const Shape& other) const;
  std::string str() const;

 private:
  std::array<std::size_t, 3> dims_{1, 1, 1};
  std::size_t rank_ = 0;
};

// Dense f64 array. A default-constructed Tensor is an empty placeholder (no
// elements); every other constructor keeps numel(shape) == size().
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor scalar(double v) { return Tensor(Shape{}, std::vector<double>{v}); }
  static Tensor vector(std::vector<double> v);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.rank(); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }
  const std::vector<double>& vec() const { return data_; }

  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }

  // Rank-3 accessors (b, c, t) and rank-2 accessors (row, col).
  double at(std::size_t b, std::size_t c, std::size_t t) const {
    return data_[(b * shape_[1] + c) * shape_[2] + t];
  }
  double& at(std::size_t b, std::size_t c, std::size_t t) {
    return data_[(b * shape_[1] + c) * shape_[2] + t];
  }
  double at(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }

  // Same data, new extents. Element counts must agree.
  Tensor reshaped(Shape shape) const;

  bool all_finite() const;
  // Throws NonFiniteError naming `where` if any element is NaN or infinite.
  void require_finite(const char* where) const;

  double max_abs_diff(const Tensor& other) const;
  double sum() const;

 private:
  Shape shape_;
  std::vector<double> data_;
};

// Batch x channel x time helpers.
inline std::size_t batch_of(const Tensor& t) { return t.shape()[0]; }
inline std::size_t channels_of(const Tensor& t) { return t.shape()[1]; }
inline std::size_t length_of(const Tensor& t) { return t.shape()[2]; }

void require_same_shape(const Tensor& a, const Tensor& b, const char* where);
void require_rank(const Tensor& a, std::size_t rank, const char* where);

}  // namespace spikescan
