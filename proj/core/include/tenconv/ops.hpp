#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tenconv/autodiff.hpp"
#include "tenconv/conv.hpp"

// Differentiable primitives. Each records its output on the tape of its
// inputs together with the rule that maps the output gradient back.
namespace tenconv::ad {

/// dL/dU = contract(G, reverse_axes(W), rank(W) - r)
/// dL/dW = contract(reverse_axes(U), G, rank(U) - r)
Var contract(Var u, Var w, std::size_t r);
Var linear_combine(std::span<const Var> terms);

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var div(Var a, Var b);
Var scale(Var a, Real s);
Var relu(Var a);
/// Zero gradient everywhere.
Var sign(Var a);
/// Sum of all entries, rank 0.
Var sum(Var a);

Var reshape(Var a, const Shape& shape);
/// Axis i of the result is axis axes[i] of the input.
Var permute(Var a, std::vector<std::size_t> axes);
/// k x k patch of a [m, H, W, cell...] map; backward scatters into the map.
Var window_gather(Var map, std::size_t y, std::size_t x, std::size_t k);

Var tensor_conv(Var input, Var weight, const TensorConvGeometry& g);

/// Picks map[:, :, offset + i * stride, offset + j * stride, ...] for an
/// out_h x out_w grid; used by downsampling skip paths.
Var subsample(Var map, std::size_t stride, std::size_t offset, std::size_t out_h, std::size_t out_w);

/// y = x for x > 0, slope[c] * x otherwise (channel axis 1). The derivative
/// at exactly 0 is the slope.
Var prelu(Var x, Var slope);

struct BatchNormOptions {
  bool training = true;
  Real eps = Real(1e-5);
  Real momentum = Real(0.1);
};

/// Normalisation of a [N, m, H, W, cell...] map per (channel, cell
/// component) over (N, H, W). gamma/beta and the running statistics are
/// shaped [m, cell...]. In training mode the running statistics are updated
/// in place (unbiased variance) and BatchTooSmall is raised for N == 1.
Var batch_norm(Var x, Var gamma, Var beta, Tensor& running_mean, Tensor& running_var,
               const BatchNormOptions& options);

/// Adds bias[c] along channel axis 1.
Var add_channel_bias(Var x, Var bias);
/// x [N, in] * w[out, in]^T + b[out].
Var linear(Var x, Var weight, Var bias);

/// Mean over the batch of -log softmax(logits)[label]. Logits are [N, C]
/// or a [N, C, 1, 1] map. Throws LabelOutOfRange.
Var softmax_cross_entropy(Var logits, std::span<const int> labels);

}  // namespace tenconv::ad
