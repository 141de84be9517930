#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "tenconv/real.hpp"

namespace tenconv {

/// Ordered axis extents. Rank 0 is a scalar with one element.
class Shape {
 public:
  Shape() = default;
  Shape(std::initializer_list<std::size_t> dims);
  explicit Shape(std::vector<std::size_t> dims);

  std::size_t rank() const { return dims_.size(); }
  std::size_t numel() const { return numel_; }
  std::size_t operator[](std::size_t axis) const { return dims_[axis]; }
  const std::vector<std::size_t>& dims() const { return dims_; }

  /// Axes [begin, end).
  Shape slice(std::size_t begin, std::size_t end) const;
  Shape reversed() const;
  Shape concat(const Shape& tail) const;

  std::string str() const;

  friend bool operator==(const Shape& a, const Shape& b) { return a.dims_ == b.dims_; }

 private:
  std::vector<std::size_t> dims_;
  std::size_t numel_ = 1;
};

/// Dense row-major array of Real values.
class Tensor {
 public:
  Tensor() : data_(1, Real(0)) {}
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<Real> data);

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
  static Tensor full(Shape shape, Real value);
  static Tensor scalar(Real value);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.rank(); }
  std::size_t numel() const { return data_.size(); }

  std::span<Real> data() { return data_; }
  std::span<const Real> data() const { return data_; }
  Real* raw() { return data_.data(); }
  const Real* raw() const { return data_.data(); }

  Real& operator[](std::size_t flat) { return data_[flat]; }
  Real operator[](std::size_t flat) const { return data_[flat]; }

  /// Multi-index access; throws OutOfBounds on a bad index.
  Real& at(std::initializer_list<std::size_t> index);
  Real at(std::initializer_list<std::size_t> index) const;
  std::size_t offset(std::span<const std::size_t> index) const;

  /// Value of a rank-0 or single-element tensor.
  Real item() const;

  bool all_finite() const;

  /// Same data, new shape with an equal element count.
  Tensor reshaped(Shape shape) const&;
  Tensor reshaped(Shape shape) &&;

  void fill(Real value);
  /// this += other, shapes must match.
  void accumulate(const Tensor& other);

 private:
  Shape shape_;
  std::vector<Real> data_;
};

/// Row-major strides of a shape, in elements.
std::vector<std::size_t> strides_of(const Shape& shape);

/// Bitwise equality of shape and data.
bool identical(const Tensor& a, const Tensor& b);

}  // namespace tenconv
