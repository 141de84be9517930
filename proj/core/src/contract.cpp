#include "tenconv/contract.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "gemm.hpp"
#include "tenconv/error.hpp"

namespace tenconv {

const char* to_string(RankMode mode) {
  switch (mode) {
    case RankMode::preserve: return "preserve";
    case RankMode::compress: return "compress";
    case RankMode::expand: return "expand";
  }
  return "?";
}

void TensorTransformSpec::validate() const {
  if (contract_count < 1 || contract_count > std::min(input_rank, weight_rank)) {
    throw RankError("contract count " + std::to_string(contract_count) + " outside [1, min(" +
                    std::to_string(input_rank) + ", " + std::to_string(weight_rank) + ")]");
  }
}

RankMode TensorTransformSpec::mode() const {
  const std::size_t out = output_rank();
  if (out == input_rank) return RankMode::preserve;
  return out < input_rank ? RankMode::compress : RankMode::expand;
}

std::vector<std::size_t> contraction_permutation(const Shape& weight_leading) {
  const std::size_t r = weight_leading.rank();
  const std::size_t count = weight_leading.numel();
  // Stride of w-axis t inside u's trailing block: product of the extents of
  // w-axes before t (those sit to the right of it in u).
  std::vector<std::size_t> u_stride(r, 1);
  for (std::size_t t = 1; t < r; ++t) u_stride[t] = u_stride[t - 1] * weight_leading[t - 1];

  std::vector<std::size_t> perm(count);
  std::vector<std::size_t> index(r, 0);
  for (std::size_t flat = 0; flat < count; ++flat) {
    std::size_t off = 0;
    for (std::size_t t = 0; t < r; ++t) off += index[t] * u_stride[t];
    perm[flat] = off;
    for (std::size_t t = r; t-- > 0;) {
      if (++index[t] < weight_leading[t]) break;
      index[t] = 0;
    }
  }
  return perm;
}

Tensor contract_any(const Tensor& u, const Tensor& w, std::size_t r) {
  const Shape& us = u.shape();
  const Shape& ws = w.shape();
  if (r > std::min(us.rank(), ws.rank())) {
    throw RankError("contract count " + std::to_string(r) + " exceeds ranks " + us.str() + " / " + ws.str());
  }
  for (std::size_t t = 0; t < r; ++t) {
    const std::size_t u_axis = us.rank() - 1 - t;
    if (us[u_axis] != ws[t]) {
      throw ShapeMismatch("u axis " + std::to_string(u_axis) + " (extent " + std::to_string(us[u_axis]) +
                          ") does not match w axis " + std::to_string(t) + " (extent " + std::to_string(ws[t]) +
                          ") for u " + us.str() + ", w " + ws.str());
    }
  }
  const Shape kept = us.slice(0, us.rank() - r);
  const Shape produced = ws.slice(r, ws.rank());
  const Shape paired = ws.slice(0, r);
  const std::size_t m = kept.numel();
  const std::size_t k = paired.numel();
  const std::size_t p = produced.numel();

  Tensor out(kept.concat(produced));
  const std::vector<std::size_t> perm = contraction_permutation(paired);
  const bool identity = std::is_sorted(perm.begin(), perm.end());
  if (identity) {
    detail::gemm_nn(u.raw(), w.raw(), out.raw(), m, k, p, false);
    return out;
  }
  std::vector<Real> gathered(m * k);
  for (std::size_t row = 0; row < m; ++row) {
    const Real* src = u.raw() + row * k;
    Real* dst = gathered.data() + row * k;
    for (std::size_t c = 0; c < k; ++c) dst[c] = src[perm[c]];
  }
  detail::gemm_nn(gathered.data(), w.raw(), out.raw(), m, k, p, false);
  return out;
}

Tensor contract(const Tensor& u, const Tensor& w, std::size_t r) {
  TensorTransformSpec{u.rank(), w.rank(), r}.validate();
  return contract_any(u, w, r);
}

Tensor linear_combine(std::span<const Tensor> tensors) {
  if (tensors.empty()) throw EmptyInput("linear_combine of an empty list");
  Tensor sum = tensors.front();
  for (std::size_t i = 1; i < tensors.size(); ++i) {
    if (!(tensors[i].shape() == sum.shape())) {
      throw ShapeMismatch("linear_combine term " + std::to_string(i) + " has shape " + tensors[i].shape().str() +
                          ", expected " + sum.shape().str());
    }
    sum.accumulate(tensors[i]);
  }
  return sum;
}

namespace {

Real sign_of(Real v) { return v > 0 ? Real(1) : (v < 0 ? Real(-1) : Real(0)); }

}  // namespace

Tensor elementwise(ElementwiseOp op, const Tensor& a, const Tensor& b) {
  if (!(a.shape() == b.shape())) {
    throw ShapeMismatch("elementwise operands " + a.shape().str() + " and " + b.shape().str());
  }
  Tensor out(a.shape());
  const std::size_t n = a.numel();
  switch (op) {
    case ElementwiseOp::add:
      for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
      break;
    case ElementwiseOp::sub:
      for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
      break;
    case ElementwiseOp::mul:
      for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
      break;
    case ElementwiseOp::div:
      for (std::size_t i = 0; i < n; ++i) {
        if (b[i] == 0) throw DivisionByZero("divisor is zero at flat index " + std::to_string(i));
        out[i] = a[i] / b[i];
      }
      break;
    default:
      throw ShapeMismatch("operation takes a scalar operand, not a tensor");
  }
  return out;
}

Tensor elementwise(ElementwiseOp op, const Tensor& a, Real s) {
  Tensor out(a.shape());
  const std::size_t n = a.numel();
  switch (op) {
    case ElementwiseOp::add:
      for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + s;
      break;
    case ElementwiseOp::sub:
      for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - s;
      break;
    case ElementwiseOp::mul:
    case ElementwiseOp::scale:
      for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * s;
      break;
    case ElementwiseOp::div:
      if (s == 0) throw DivisionByZero("scalar divisor is zero");
      for (std::size_t i = 0; i < n; ++i) out[i] = a[i] / s;
      break;
    case ElementwiseOp::max_with_zero:
      for (std::size_t i = 0; i < n; ++i) out[i] = a[i] > 0 ? a[i] : Real(0);
      break;
    case ElementwiseOp::sign:
      for (std::size_t i = 0; i < n; ++i) out[i] = sign_of(a[i]);
      break;
  }
  return out;
}

Tensor reshape(const Tensor& t, const Shape& shape) { return t.reshaped(shape); }

Tensor flatten(const Tensor& t) { return t.reshaped(Shape{t.numel()}); }

Tensor permute(const Tensor& t, std::span<const std::size_t> axes) {
  const std::size_t rank = t.rank();
  std::vector<bool> seen(rank, false);
  if (axes.size() != rank) throw RankError("permutation length does not match rank " + std::to_string(rank));
  std::vector<std::size_t> dims(rank);
  for (std::size_t i = 0; i < rank; ++i) {
    if (axes[i] >= rank || seen[axes[i]]) throw RankError("invalid axis permutation");
    seen[axes[i]] = true;
    dims[i] = t.shape()[axes[i]];
  }
  Tensor out{Shape(dims)};
  if (rank == 0) {
    out[0] = t[0];
    return out;
  }
  const std::vector<std::size_t> in_strides = strides_of(t.shape());
  std::vector<std::size_t> step(rank);
  for (std::size_t i = 0; i < rank; ++i) step[i] = in_strides[axes[i]];

  std::vector<std::size_t> index(rank, 0);
  std::size_t src = 0;
  for (std::size_t flat = 0; flat < out.numel(); ++flat) {
    out[flat] = t[src];
    for (std::size_t i = rank; i-- > 0;) {
      src += step[i];
      if (++index[i] < dims[i]) break;
      src -= step[i] * dims[i];
      index[i] = 0;
    }
  }
  return out;
}

Tensor reverse_axes(const Tensor& t) {
  std::vector<std::size_t> axes(t.rank());
  std::iota(axes.rbegin(), axes.rend(), std::size_t{0});
  return permute(t, axes);
}

Tensor slice_window(const Tensor& map, std::size_t y, std::size_t x, std::size_t k) {
  const Shape& s = map.shape();
  if (s.rank() < 3) throw RankError("feature map needs rank >= 3, got " + s.str());
  if (k == 0 || y + k > s[1] || x + k > s[2]) {
    throw OutOfBounds("window " + std::to_string(k) + "x" + std::to_string(k) + " at (" + std::to_string(y) + ", " +
                      std::to_string(x) + ") exceeds map " + s.str());
  }
  const Shape cell = s.slice(3, s.rank());
  const std::size_t q = cell.numel();
  Tensor out(Shape{s[0], k, k}.concat(cell));
  Real* dst = out.raw();
  for (std::size_t c = 0; c < s[0]; ++c) {
    for (std::size_t dy = 0; dy < k; ++dy) {
      const Real* src = map.raw() + ((c * s[1] + y + dy) * s[2] + x) * q;
      dst = std::copy(src, src + k * q, dst);
    }
  }
  return out;
}

}  // namespace tenconv
