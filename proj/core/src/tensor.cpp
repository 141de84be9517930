#include "tenconv/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

#include "tenconv/error.hpp"

namespace tenconv {

namespace {

std::size_t checked_product(const std::vector<std::size_t>& dims) {
  std::size_t n = 1;
  for (std::size_t d : dims) {
    if (d == 0) throw ShapeMismatch("zero extent in shape");
    if (n > std::numeric_limits<std::size_t>::max() / d) {
      throw ShapeMismatch("element count overflows the index range");
    }
    n *= d;
  }
  return n;
}

}  // namespace

Shape::Shape(std::initializer_list<std::size_t> dims) : Shape(std::vector<std::size_t>(dims)) {}

Shape::Shape(std::vector<std::size_t> dims) : dims_(std::move(dims)), numel_(checked_product(dims_)) {}

Shape Shape::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > dims_.size()) {
    throw OutOfBounds("axis slice [" + std::to_string(begin) + ", " + std::to_string(end) + ") of " + str());
  }
  return Shape(std::vector<std::size_t>(dims_.begin() + static_cast<std::ptrdiff_t>(begin),
                                        dims_.begin() + static_cast<std::ptrdiff_t>(end)));
}

Shape Shape::reversed() const { return Shape(std::vector<std::size_t>(dims_.rbegin(), dims_.rend())); }

Shape Shape::concat(const Shape& tail) const {
  std::vector<std::size_t> dims = dims_;
  dims.insert(dims.end(), tail.dims_.begin(), tail.dims_.end());
  return Shape(std::move(dims));
}

std::string Shape::str() const {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < dims_.size(); ++i) out << (i ? "," : "") << dims_[i];
  out << ']';
  return out.str();
}

std::vector<std::size_t> strides_of(const Shape& shape) {
  std::vector<std::size_t> strides(shape.rank(), 1);
  for (std::size_t i = shape.rank(); i-- > 1;) strides[i - 1] = strides[i] * shape[i];
  return strides;
}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)), data_(shape_.numel(), Real(0)) {}

Tensor::Tensor(Shape shape, std::vector<Real> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_.numel()) {
    throw ShapeMismatch("data length " + std::to_string(data_.size()) + " does not match shape " + shape_.str());
  }
}

Tensor Tensor::full(Shape shape, Real value) {
  Tensor t(std::move(shape));
  t.fill(value);
  return t;
}

Tensor Tensor::scalar(Real value) { return Tensor(Shape{}, {value}); }

std::size_t Tensor::offset(std::span<const std::size_t> index) const {
  if (index.size() != shape_.rank()) {
    throw OutOfBounds("index of rank " + std::to_string(index.size()) + " for shape " + shape_.str());
  }
  std::size_t flat = 0;
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= shape_[i]) {
      throw OutOfBounds("index " + std::to_string(index[i]) + " on axis " + std::to_string(i) + " of shape " +
                        shape_.str());
    }
    flat = flat * shape_[i] + index[i];
  }
  return flat;
}

Real& Tensor::at(std::initializer_list<std::size_t> index) {
  return data_[offset(std::span<const std::size_t>(index.begin(), index.size()))];
}

Real Tensor::at(std::initializer_list<std::size_t> index) const {
  return data_[offset(std::span<const std::size_t>(index.begin(), index.size()))];
}

Real Tensor::item() const {
  if (data_.size() != 1) throw ShapeMismatch("item() on tensor of shape " + shape_.str());
  return data_[0];
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](Real v) { return std::isfinite(v); });
}

Tensor Tensor::reshaped(Shape shape) const& {
  Tensor copy = *this;
  return std::move(copy).reshaped(std::move(shape));
}

Tensor Tensor::reshaped(Shape shape) && {
  if (shape.numel() != data_.size()) {
    throw ShapeMismatch("cannot reshape " + shape_.str() + " to " + shape.str());
  }
  shape_ = std::move(shape);
  return std::move(*this);
}

void Tensor::fill(Real value) { std::fill(data_.begin(), data_.end(), value); }

void Tensor::accumulate(const Tensor& other) {
  if (!(other.shape_ == shape_)) {
    throw ShapeMismatch("accumulate " + other.shape_.str() + " into " + shape_.str());
  }
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
}

bool identical(const Tensor& a, const Tensor& b) {
  return a.shape() == b.shape() &&
         std::memcmp(a.raw(), b.raw(), a.numel() * sizeof(Real)) == 0;
}

}  // namespace tenconv
