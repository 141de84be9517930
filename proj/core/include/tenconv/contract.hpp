#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tenconv/tensor.hpp"

namespace tenconv {

/// Whether a transformation keeps, lowers or raises the rank of its input.
enum class RankMode { preserve, compress, expand };

const char* to_string(RankMode mode);

/// Declares a contraction between an input tensor of rank `input_rank` and a
/// neuron tensor of rank `weight_rank` over `contract_count` axes.
struct TensorTransformSpec {
  std::size_t input_rank = 0;
  std::size_t weight_rank = 0;
  std::size_t contract_count = 0;

  /// Throws RankError unless 1 <= contract_count <= min(input_rank, weight_rank).
  void validate() const;
  std::size_t output_rank() const { return input_rank + weight_rank - 2 * contract_count; }
  RankMode mode() const;
};

/// Neuron tensor transformation.
///
/// The trailing `r` axes of `u` are summed against the leading `r` axes of
/// `w` with reversed pairing: axis (rank(u) - 1 - t) of `u` meets axis t of
/// `w`. The result has the leading rank(u) - r extents of `u` followed by the
/// trailing rank(w) - r extents of `w`:
///
///   V[a..., p...] = sum U[a..., i_{r-1}, ..., i_0] * W[i_0, ..., i_{r-1}, p...]
///
/// e.g. U[1,2,3,4] with W[4,3,7,8] and r = 2 gives V[1,2,7,8].
/// Throws RankError when r is outside [1, min(rank u, rank w)] and
/// ShapeMismatch when a paired extent differs.
Tensor contract(const Tensor& u, const Tensor& w, std::size_t r);

/// Same as contract() but also accepts r = 0 (outer product). Used by the
/// adjoints, whose contraction count can reach zero.
Tensor contract_any(const Tensor& u, const Tensor& w, std::size_t r);

/// Maps a flat index over the contracted block in `w` order (i_0 slowest) to
/// the flat offset of the same element inside the trailing block of `u`
/// (i_0 fastest). `weight_leading` holds the extents of w's leading r axes.
std::vector<std::size_t> contraction_permutation(const Shape& weight_leading);

/// Elementwise sum of equally shaped tensors (EmptyInput / ShapeMismatch).
Tensor linear_combine(std::span<const Tensor> tensors);

enum class ElementwiseOp { add, sub, mul, div, scale, max_with_zero, sign };

/// Binary tensor-tensor form (add, sub, mul, div).
Tensor elementwise(ElementwiseOp op, const Tensor& a, const Tensor& b);
/// Tensor-scalar form (add, sub, mul, div and scale use the scalar; the unary
/// max_with_zero and sign ignore it).
Tensor elementwise(ElementwiseOp op, const Tensor& a, Real scalar);

inline Tensor add(const Tensor& a, const Tensor& b) { return elementwise(ElementwiseOp::add, a, b); }
inline Tensor sub(const Tensor& a, const Tensor& b) { return elementwise(ElementwiseOp::sub, a, b); }
inline Tensor mul(const Tensor& a, const Tensor& b) { return elementwise(ElementwiseOp::mul, a, b); }
inline Tensor div(const Tensor& a, const Tensor& b) { return elementwise(ElementwiseOp::div, a, b); }
inline Tensor scale(const Tensor& a, Real s) { return elementwise(ElementwiseOp::scale, a, s); }
inline Tensor max_with_zero(const Tensor& a) { return elementwise(ElementwiseOp::max_with_zero, a, 0); }
inline Tensor sign(const Tensor& a) { return elementwise(ElementwiseOp::sign, a, 0); }

Tensor reshape(const Tensor& t, const Shape& shape);
Tensor flatten(const Tensor& t);

/// Reorders axes: result axis i is input axis `axes[i]`.
Tensor permute(const Tensor& t, std::span<const std::size_t> axes);
Tensor reverse_axes(const Tensor& t);

/// k x k spatial patch of a feature map shaped [m, H, W, cell...] whose
/// top-left cell is (y, x). Returns [m, k, k, cell...].
Tensor slice_window(const Tensor& map, std::size_t y, std::size_t x, std::size_t k);

}  // namespace tenconv
