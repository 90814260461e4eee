#include "spikescan/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace spikescan {

Shape::Shape(std::initializer_list<std::size_t> extents)
    : Shape(std::span<const std::size_t>(extents.begin(), extents.size())) {}

Shape::Shape(std::span<const std::size_t> extents) {
  if (extents.size() > 3) throw ShapeError("rank > 3 is not supported");
  rank_ = extents.size();
  std::copy(extents.begin(), extents.end(), dims_.begin());
}

std::size_t Shape::operator[](std::size_t axis) const {
  if (axis >= rank_) throw ShapeError("axis " + std::to_string(axis) + " out of range for " + str());
  return dims_[axis];
}

std::size_t Shape::numel() const {
  std::size_t n = 1;
  for (std::size_t i = 0; i < rank_; ++i) n *= dims_[i];
  return n;
}

bool Shape::operator==(const Shape& other) const {
  if (rank_ != other.rank_) return false;
  for (std::size_t i = 0; i < rank_; ++i)
    if (dims_[i] != other.dims_[i]) return false;
  return true;
}

std::string Shape::str() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < rank_; ++i) os << (i ? "x" : "") << dims_[i];
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, double fill) : shape_(shape), data_(shape.numel(), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(shape), data_(std::move(data)) {
  if (data_.size() != shape_.numel())
    throw ShapeError("data length " + std::to_string(data_.size()) + " does not match shape " + shape_.str());
}

Tensor Tensor::vector(std::vector<double> v) {
  const std::size_t n = v.size();
  return Tensor(Shape{n}, std::move(v));
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape.numel() != data_.size())
    throw ShapeError("cannot reshape " + shape_.str() + " to " + shape.str());
  return Tensor(shape, data_);
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void Tensor::require_finite(const char* where) const {
  if (!all_finite()) throw NonFiniteError(std::string("non-finite value produced by ") + where);
}

double Tensor::max_abs_diff(const Tensor& other) const {
  require_same_shape(*this, other, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < data_.size(); ++i) m = std::max(m, std::abs(data_[i] - other.data_[i]));
  return m;
}

double Tensor::sum() const { return std::accumulate(data_.begin(), data_.end(), 0.0); }

void require_same_shape(const Tensor& a, const Tensor& b, const char* where) {
  if (!(a.shape() == b.shape()))
    throw ShapeError(std::string(where) + ": shape mismatch " + a.shape().str() + " vs " + b.shape().str());
}

void require_rank(const Tensor& a, std::size_t rank, const char* where) {
  if (a.rank() != rank)
    throw ShapeError(std::string(where) + ": expected rank " + std::to_string(rank) + ", got " + a.shape().str());
}

}  // namespace spikescan
