#pragma once

#include <cstddef>

#include "tenconv/tensor.hpp"

namespace tenconv {

/// Geometry of a tensor convolution over feature maps shaped
/// [N, m, H, W, cell...]. Every output cell is the sum, over the k x k x m
/// input window, of contract(input cell, neuron tensor, r).
///
/// The weight tensor is shaped [out, m, k, k, weight_cell...] with
/// weight_cell = reversed(trailing r extents of in_cell) ++ produced extents.
/// A contract count of 0 with scalar cells gives an ordinary convolution.
struct TensorConvGeometry {
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t height = 1;
  std::size_t width = 1;
  std::size_t kernel = 1;
  std::size_t stride = 1;
  std::size_t pad = 0;
  std::size_t contract = 0;
  Shape in_cell;
  Shape weight_cell;

  /// Validates extents, the cell/weight pairing and the spatial geometry.
  /// Throws ShapeMismatch, RankError or BadGeometry.
  void validate() const;

  std::size_t out_height() const;
  std::size_t out_width() const;
  Shape out_cell() const;
  /// Leading in_cell extents that pass through untouched.
  Shape kept_cell() const { return in_cell.slice(0, in_cell.rank() - contract); }
  Shape paired_cell() const { return weight_cell.slice(0, contract); }
  Shape produced_cell() const { return weight_cell.slice(contract, weight_cell.rank()); }

  Shape input_shape(std::size_t batch) const;
  Shape weight_shape() const;
  Shape output_shape(std::size_t batch) const;

  /// Number of transformed tensors summed per output cell (k * k * m).
  std::size_t summands() const { return kernel * kernel * in_channels; }
};

/// Spatial output extent floor((in + 2 pad - k) / stride) + 1; BadGeometry
/// when the window does not fit.
std::size_t conv_out_extent(std::size_t in, std::size_t kernel, std::size_t stride, std::size_t pad);

/// Forward pass lowered to one matrix product per image chunk.
Tensor tensor_conv_forward(const Tensor& input, const Tensor& weight, const TensorConvGeometry& g);

/// Adds dL/d(input) into `grad_input` and dL/d(weight) into `grad_weight`;
/// either pointer may be null.
void tensor_conv_backward(const Tensor& input, const Tensor& weight, const Tensor& grad_output,
                          Tensor* grad_input, Tensor* grad_weight, const TensorConvGeometry& g);

}  // namespace tenconv
