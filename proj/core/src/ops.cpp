#include "tenconv/ops.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "gemm.hpp"
#include "tenconv/contract.hpp"
#include "tenconv/error.hpp"

namespace tenconv::ad {

namespace {

Tape& tape_of(Var v) {
  if (!v.tape()) throw OutOfBounds("variable is not bound to a tape");
  return *v.tape();
}

void add_scaled(Tensor& dst, const Tensor& src, Real s) {
  for (std::size_t i = 0; i < dst.numel(); ++i) dst[i] += s * src[i];
}

}  // namespace

Var contract(Var u, Var w, std::size_t r) {
  Tensor out = tenconv::contract(u.value(), w.value(), r);
  return tape_of(u).record("contract", std::move(out), {u, w},
                           [u, w, r](const Tensor& g, std::span<Tensor* const> grads) {
                             if (grads[0]) {
                               grads[0]->accumulate(contract_any(g, reverse_axes(w.value()), w.value().rank() - r));
                             }
                             if (grads[1]) {
                               grads[1]->accumulate(contract_any(reverse_axes(u.value()), g, u.value().rank() - r));
                             }
                           });
}

Var linear_combine(std::span<const Var> terms) {
  if (terms.empty()) throw EmptyInput("linear_combine of an empty list");
  std::vector<Tensor> values;
  values.reserve(terms.size());
  for (const Var& v : terms) values.push_back(v.value());
  Tensor out = tenconv::linear_combine(values);
  return tape_of(terms.front())
      .record("linear_combine", std::move(out), std::vector<Var>(terms.begin(), terms.end()),
              [](const Tensor& g, std::span<Tensor* const> grads) {
                for (Tensor* grad : grads) {
                  if (grad) grad->accumulate(g);
                }
              });
}

Var add(Var a, Var b) {
  return tape_of(a).record("add", tenconv::add(a.value(), b.value()), {a, b},
                           [](const Tensor& g, std::span<Tensor* const> grads) {
                             if (grads[0]) grads[0]->accumulate(g);
                             if (grads[1]) grads[1]->accumulate(g);
                           });
}

Var sub(Var a, Var b) {
  return tape_of(a).record("sub", tenconv::sub(a.value(), b.value()), {a, b},
                           [](const Tensor& g, std::span<Tensor* const> grads) {
                             if (grads[0]) grads[0]->accumulate(g);
                             if (grads[1]) add_scaled(*grads[1], g, Real(-1));
                           });
}

Var mul(Var a, Var b) {
  return tape_of(a).record("mul", tenconv::mul(a.value(), b.value()), {a, b},
                           [a, b](const Tensor& g, std::span<Tensor* const> grads) {
                             if (grads[0]) grads[0]->accumulate(tenconv::mul(g, b.value()));
                             if (grads[1]) grads[1]->accumulate(tenconv::mul(g, a.value()));
                           });
}

Var div(Var a, Var b) {
  return tape_of(a).record("div", tenconv::div(a.value(), b.value()), {a, b},
                           [a, b](const Tensor& g, std::span<Tensor* const> grads) {
                             const Tensor& x = a.value();
                             const Tensor& y = b.value();
                             for (std::size_t i = 0; i < g.numel(); ++i) {
                               if (grads[0]) (*grads[0])[i] += g[i] / y[i];
                               if (grads[1]) (*grads[1])[i] -= g[i] * x[i] / (y[i] * y[i]);
                             }
                           });
}

Var scale(Var a, Real s) {
  return tape_of(a).record("scale", tenconv::scale(a.value(), s), {a},
                           [s](const Tensor& g, std::span<Tensor* const> grads) {
                             if (grads[0]) add_scaled(*grads[0], g, s);
                           });
}

Var relu(Var a) {
  return tape_of(a).record("relu", max_with_zero(a.value()), {a},
                           [a](const Tensor& g, std::span<Tensor* const> grads) {
                             const Tensor& x = a.value();
                             for (std::size_t i = 0; i < g.numel(); ++i) {
                               if (x[i] > 0) (*grads[0])[i] += g[i];
                             }
                           });
}

Var sign(Var a) {
  return tape_of(a).record("sign", tenconv::sign(a.value()), {a}, [](const Tensor&, std::span<Tensor* const>) {});
}

Var sum(Var a) {
  Real total = 0;
  for (Real v : a.value().data()) total += v;
  return tape_of(a).record("sum", Tensor::scalar(total), {a}, [](const Tensor& g, std::span<Tensor* const> grads) {
    const Real up = g.item();
    for (Real& v : grads[0]->data()) v += up;
  });
}

Var reshape(Var a, const Shape& shape) {
  return tape_of(a).record("reshape", a.value().reshaped(shape), {a},
                           [](const Tensor& g, std::span<Tensor* const> grads) {
                             Real* dst = grads[0]->raw();
                             for (std::size_t i = 0; i < g.numel(); ++i) dst[i] += g[i];
                           });
}

Var permute(Var a, std::vector<std::size_t> axes) {
  Tensor out = tenconv::permute(a.value(), axes);
  return tape_of(a).record("permute", std::move(out), {a},
                           [axes](const Tensor& g, std::span<Tensor* const> grads) {
                             std::vector<std::size_t> inverse(axes.size());
                             for (std::size_t i = 0; i < axes.size(); ++i) inverse[axes[i]] = i;
                             grads[0]->accumulate(tenconv::permute(g, inverse));
                           });
}

Var window_gather(Var map, std::size_t y, std::size_t x, std::size_t k) {
  Tensor out = slice_window(map.value(), y, x, k);
  return tape_of(map).record("window_gather", std::move(out), {map},
                             [y, x, k](const Tensor& g, std::span<Tensor* const> grads) {
                               Tensor& dst = *grads[0];
                               const Shape& s = dst.shape();
                               const std::size_t q = s.slice(3, s.rank()).numel();
                               const Real* src = g.raw();
                               for (std::size_t c = 0; c < s[0]; ++c) {
                                 for (std::size_t dy = 0; dy < k; ++dy) {
                                   Real* row = dst.raw() + ((c * s[1] + y + dy) * s[2] + x) * q;
                                   for (std::size_t i = 0; i < k * q; ++i) row[i] += *src++;
                                 }
                               }
                             });
}

Var tensor_conv(Var input, Var weight, const TensorConvGeometry& g) {
  Tensor out = tensor_conv_forward(input.value(), weight.value(), g);
  return tape_of(input).record("tensor_conv", std::move(out), {input, weight},
                               [input, weight, g](const Tensor& up, std::span<Tensor* const> grads) {
                                 tensor_conv_backward(input.value(), weight.value(), up, grads[0], grads[1], g);
                               });
}

Var subsample(Var map, std::size_t stride, std::size_t offset, std::size_t out_h, std::size_t out_w) {
  const Shape& s = map.shape();
  if (s.rank() < 4) throw RankError("subsample needs a [N, m, H, W, ...] map, got " + s.str());
  if (stride == 0 || offset + (out_h - 1) * stride >= s[2] || offset + (out_w - 1) * stride >= s[3]) {
    throw BadGeometry("subsample grid " + std::to_string(out_h) + "x" + std::to_string(out_w) + " stride " +
                      std::to_string(stride) + " offset " + std::to_string(offset) + " exceeds map " + s.str());
  }
  const std::size_t planes = s[0] * s[1];
  const std::size_t h = s[2], w = s[3];
  const std::size_t q = s.slice(4, s.rank()).numel();
  std::vector<std::size_t> dims = s.dims();
  dims[2] = out_h;
  dims[3] = out_w;
  Tensor out{Shape(dims)};
  auto src_offset = [=](std::size_t plane, std::size_t oy, std::size_t ox) {
    return ((plane * h + offset + oy * stride) * w + offset + ox * stride) * q;
  };
  for (std::size_t pl = 0; pl < planes; ++pl) {
    for (std::size_t oy = 0; oy < out_h; ++oy) {
      for (std::size_t ox = 0; ox < out_w; ++ox) {
        const Real* src = map.value().raw() + src_offset(pl, oy, ox);
        std::copy(src, src + q, out.raw() + ((pl * out_h + oy) * out_w + ox) * q);
      }
    }
  }
  return tape_of(map).record("subsample", std::move(out), {map},
                             [=](const Tensor& g, std::span<Tensor* const> grads) {
                               for (std::size_t pl = 0; pl < planes; ++pl) {
                                 for (std::size_t oy = 0; oy < out_h; ++oy) {
                                   for (std::size_t ox = 0; ox < out_w; ++ox) {
                                     const Real* src = g.raw() + ((pl * out_h + oy) * out_w + ox) * q;
                                     Real* dst = grads[0]->raw() + src_offset(pl, oy, ox);
                                     for (std::size_t i = 0; i < q; ++i) dst[i] += src[i];
                                   }
                                 }
                               }
                             });
}

Var prelu(Var x, Var slope) {
  const Shape& s = x.shape();
  if (s.rank() < 2 || slope.shape().rank() != 1 || slope.shape()[0] != s[1]) {
    throw ShapeMismatch("prelu slopes " + slope.shape().str() + " for input " + s.str());
  }
  const std::size_t batch = s[0], channels = s[1];
  const std::size_t inner = x.value().numel() / (batch * channels);
  Tensor out(s);
  const Real* in = x.value().raw();
  const Real* a = slope.value().raw();
  for (std::size_t n = 0; n < batch; ++n) {
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t base = (n * channels + c) * inner;
      for (std::size_t i = 0; i < inner; ++i) {
        const Real v = in[base + i];
        out[base + i] = v > 0 ? v : a[c] * v;
      }
    }
  }
  return tape_of(x).record("prelu", std::move(out), {x, slope},
                           [x, slope, batch, channels, inner](const Tensor& g, std::span<Tensor* const> grads) {
                             const Real* in = x.value().raw();
                             const Real* a = slope.value().raw();
                             for (std::size_t n = 0; n < batch; ++n) {
                               for (std::size_t c = 0; c < channels; ++c) {
                                 const std::size_t base = (n * channels + c) * inner;
                                 Real da = 0;
                                 for (std::size_t i = 0; i < inner; ++i) {
                                   const Real v = in[base + i];
                                   if (v > 0) {
                                     if (grads[0]) (*grads[0])[base + i] += g[base + i];
                                   } else {
                                     if (grads[0]) (*grads[0])[base + i] += a[c] * g[base + i];
                                     da += v * g[base + i];
                                   }
                                 }
                                 if (grads[1]) (*grads[1])[c] += da;
                               }
                             }
                           });
}

Var batch_norm(Var x, Var gamma, Var beta, Tensor& running_mean, Tensor& running_var,
               const BatchNormOptions& options) {
  const Shape& s = x.shape();
  if (s.rank() < 4) throw RankError("batch_norm needs a [N, m, H, W, ...] map, got " + s.str());
  const Shape param_shape = Shape{s[1]}.concat(s.slice(4, s.rank()));
  for (const Tensor* t : {&gamma.value(), &beta.value(), static_cast<const Tensor*>(&running_mean),
                          static_cast<const Tensor*>(&running_var)}) {
    if (!(t->shape() == param_shape)) {
      throw ShapeMismatch("batch_norm parameter " + t->shape().str() + ", expected " + param_shape.str());
    }
  }
  const std::size_t batch = s[0], channels = s[1], hw = s[2] * s[3];
  const std::size_t q = param_shape.numel() / channels;
  const std::size_t stats = param_shape.numel();
  const Real* in = x.value().raw();
  const Real* gm = gamma.value().raw();
  const Real* bt = beta.value().raw();
  Tensor out(s);

  auto index = [=](std::size_t n, std::size_t c, std::size_t pos) { return ((n * channels + c) * hw + pos) * q; };

  if (!options.training) {
    std::vector<Real> inv_std(stats);
    for (std::size_t j = 0; j < stats; ++j) inv_std[j] = Real(1) / std::sqrt(running_var[j] + options.eps);
    const Real* rm = running_mean.raw();
    for (std::size_t n = 0; n < batch; ++n)
      for (std::size_t c = 0; c < channels; ++c)
        for (std::size_t pos = 0; pos < hw; ++pos) {
          const std::size_t base = index(n, c, pos);
          for (std::size_t k = 0; k < q; ++k) {
            const std::size_t j = c * q + k;
            out[base + k] = gm[j] * (in[base + k] - rm[j]) * inv_std[j] + bt[j];
          }
        }
    return tape_of(x).record(
        "batch_norm", std::move(out), {x, gamma, beta},
        [x, inv_std = std::move(inv_std), rm = running_mean, batch, channels, hw, q, index,
         gamma](const Tensor& g, std::span<Tensor* const> grads) {
          const Real* in = x.value().raw();
          const Real* gm = gamma.value().raw();
          for (std::size_t n = 0; n < batch; ++n)
            for (std::size_t c = 0; c < channels; ++c)
              for (std::size_t pos = 0; pos < hw; ++pos) {
                const std::size_t base = index(n, c, pos);
                for (std::size_t k = 0; k < q; ++k) {
                  const std::size_t j = c * q + k;
                  const Real up = g[base + k];
                  if (grads[0]) (*grads[0])[base + k] += up * gm[j] * inv_std[j];
                  if (grads[1]) (*grads[1])[j] += up * (in[base + k] - rm[j]) * inv_std[j];
                  if (grads[2]) (*grads[2])[j] += up;
                }
              }
        });
  }

  if (batch < 2) throw BatchTooSmall("batch_norm in training mode needs at least 2 samples, got " + std::to_string(batch));
  const Real count = static_cast<Real>(batch * hw);
  std::vector<Real> mean(stats, 0), var(stats, 0);
  for (std::size_t n = 0; n < batch; ++n)
    for (std::size_t c = 0; c < channels; ++c)
      for (std::size_t pos = 0; pos < hw; ++pos) {
        const std::size_t base = index(n, c, pos);
        for (std::size_t k = 0; k < q; ++k) mean[c * q + k] += in[base + k];
      }
  for (Real& m : mean) m /= count;
  for (std::size_t n = 0; n < batch; ++n)
    for (std::size_t c = 0; c < channels; ++c)
      for (std::size_t pos = 0; pos < hw; ++pos) {
        const std::size_t base = index(n, c, pos);
        for (std::size_t k = 0; k < q; ++k) {
          const Real d = in[base + k] - mean[c * q + k];
          var[c * q + k] += d * d;
        }
      }
  for (Real& v : var) v /= count;

  auto inv_std = std::make_shared<std::vector<Real>>(stats);
  auto xhat = std::make_shared<std::vector<Real>>(x.value().numel());
  for (std::size_t j = 0; j < stats; ++j) (*inv_std)[j] = Real(1) / std::sqrt(var[j] + options.eps);
  for (std::size_t n = 0; n < batch; ++n)
    for (std::size_t c = 0; c < channels; ++c)
      for (std::size_t pos = 0; pos < hw; ++pos) {
        const std::size_t base = index(n, c, pos);
        for (std::size_t k = 0; k < q; ++k) {
          const std::size_t j = c * q + k;
          const Real xh = (in[base + k] - mean[j]) * (*inv_std)[j];
          (*xhat)[base + k] = xh;
          out[base + k] = gm[j] * xh + bt[j];
        }
      }

  const Real unbias = count > 1 ? count / (count - 1) : Real(1);
  for (std::size_t j = 0; j < stats; ++j) {
    running_mean[j] = (1 - options.momentum) * running_mean[j] + options.momentum * mean[j];
    running_var[j] = (1 - options.momentum) * running_var[j] + options.momentum * var[j] * unbias;
  }

  return tape_of(x).record(
      "batch_norm", std::move(out), {x, gamma, beta},
      [gamma, inv_std, xhat, batch, channels, hw, q, count, index, stats](const Tensor& g,
                                                                         std::span<Tensor* const> grads) {
        const Real* gm = gamma.value().raw();
        std::vector<Real> sum_dy(stats, 0), sum_dy_xhat(stats, 0);
        for (std::size_t n = 0; n < batch; ++n)
          for (std::size_t c = 0; c < channels; ++c)
            for (std::size_t pos = 0; pos < hw; ++pos) {
              const std::size_t base = index(n, c, pos);
              for (std::size_t k = 0; k < q; ++k) {
                sum_dy[c * q + k] += g[base + k];
                sum_dy_xhat[c * q + k] += g[base + k] * (*xhat)[base + k];
              }
            }
        if (grads[1])
          for (std::size_t j = 0; j < stats; ++j) (*grads[1])[j] += sum_dy_xhat[j];
        if (grads[2])
          for (std::size_t j = 0; j < stats; ++j) (*grads[2])[j] += sum_dy[j];
        if (!grads[0]) return;
        for (std::size_t n = 0; n < batch; ++n)
          for (std::size_t c = 0; c < channels; ++c)
            for (std::size_t pos = 0; pos < hw; ++pos) {
              const std::size_t base = index(n, c, pos);
              for (std::size_t k = 0; k < q; ++k) {
                const std::size_t j = c * q + k;
                const Real dxhat = g[base + k] * gm[j];
                const Real mean_dxhat = sum_dy[j] * gm[j] / count;
                const Real mean_dxhat_xhat = sum_dy_xhat[j] * gm[j] / count;
                (*grads[0])[base + k] +=
                    (*inv_std)[j] * (dxhat - mean_dxhat - (*xhat)[base + k] * mean_dxhat_xhat);
              }
            }
      });
}

Var add_channel_bias(Var x, Var bias) {
  const Shape& s = x.shape();
  if (s.rank() < 2 || bias.shape().rank() != 1 || bias.shape()[0] != s[1]) {
    throw ShapeMismatch("bias " + bias.shape().str() + " for input " + s.str());
  }
  const std::size_t batch = s[0], channels = s[1];
  const std::size_t inner = x.value().numel() / (batch * channels);
  Tensor out = x.value();
  for (std::size_t n = 0; n < batch; ++n)
    for (std::size_t c = 0; c < channels; ++c)
      for (std::size_t i = 0; i < inner; ++i) out[(n * channels + c) * inner + i] += bias.value()[c];
  return tape_of(x).record("add_channel_bias", std::move(out), {x, bias},
                           [batch, channels, inner](const Tensor& g, std::span<Tensor* const> grads) {
                             if (grads[0]) grads[0]->accumulate(g);
                             if (!grads[1]) return;
                             for (std::size_t n = 0; n < batch; ++n)
                               for (std::size_t c = 0; c < channels; ++c) {
                                 Real acc = 0;
                                 for (std::size_t i = 0; i < inner; ++i) acc += g[(n * channels + c) * inner + i];
                                 (*grads[1])[c] += acc;
                               }
                           });
}

Var linear(Var x, Var weight, Var bias) {
  const Shape& xs = x.shape();
  const Shape& ws = weight.shape();
  if (xs.rank() != 2 || ws.rank() != 2 || ws[1] != xs[1] || bias.shape().rank() != 1 || bias.shape()[0] != ws[0]) {
    throw ShapeMismatch("linear: input " + xs.str() + ", weight " + ws.str() + ", bias " + bias.shape().str());
  }
  const std::size_t n = xs[0], in = xs[1], outs = ws[0];
  Tensor out(Shape{n, outs});
  detail::gemm_nt(x.value().raw(), weight.value().raw(), out.raw(), n, in, outs, false);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t o = 0; o < outs; ++o) out[i * outs + o] += bias.value()[o];
  return tape_of(x).record("linear", std::move(out), {x, weight, bias},
                           [x, weight, n, in, outs](const Tensor& g, std::span<Tensor* const> grads) {
                             if (grads[0]) detail::gemm_nn(g.raw(), weight.value().raw(), grads[0]->raw(), n, outs, in, true);
                             if (grads[1]) detail::gemm_tn(g.raw(), x.value().raw(), grads[1]->raw(), outs, n, in, true);
                             if (grads[2])
                               for (std::size_t i = 0; i < n; ++i)
                                 for (std::size_t o = 0; o < outs; ++o) (*grads[2])[o] += g[i * outs + o];
                           });
}

Var softmax_cross_entropy(Var logits, std::span<const int> labels) {
  const Shape& s = logits.shape();
  const bool map_form = s.rank() == 4 && s[2] == 1 && s[3] == 1;
  if (!(s.rank() == 2 || map_form)) {
    throw ShapeMismatch("logits must be [N, C] or [N, C, 1, 1], got " + s.str());
  }
  const std::size_t n = s[0], classes = s[1];
  if (labels.size() != n) {
    throw ShapeMismatch(std::to_string(labels.size()) + " labels for a batch of " + std::to_string(n));
  }
  auto probs = std::make_shared<std::vector<Real>>(n * classes);
  const Real* z = logits.value().raw();
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= classes) {
      throw LabelOutOfRange("label " + std::to_string(labels[i]) + " outside [0, " + std::to_string(classes) + ")");
    }
    const Real* row = z + i * classes;
    const Real mx = *std::max_element(row, row + classes);
    Real denom = 0;
    for (std::size_t c = 0; c < classes; ++c) denom += std::exp(row[c] - mx);
    for (std::size_t c = 0; c < classes; ++c) (*probs)[i * classes + c] = std::exp(row[c] - mx) / denom;
    total += static_cast<double>(std::log(denom) + mx - row[labels[i]]);
  }
  std::vector<int> owned(labels.begin(), labels.end());
  return tape_of(logits).record(
      "softmax_cross_entropy", Tensor::scalar(static_cast<Real>(total / static_cast<double>(n))), {logits},
      [probs, owned = std::move(owned), n, classes](const Tensor& g, std::span<Tensor* const> grads) {
        const Real up = g.item() / static_cast<Real>(n);
        Real* dst = grads[0]->raw();
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t c = 0; c < classes; ++c) {
            const Real target = static_cast<int>(c) == owned[i] ? Real(1) : Real(0);
            dst[i * classes + c] += up * ((*probs)[i * classes + c] - target);
          }
        }
      });
}

}  // namespace tenconv::ad
