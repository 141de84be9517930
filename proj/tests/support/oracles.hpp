#pragma once

// Reference implementations used by the tests. They favour directness over
// speed and share no code with the library kernels.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "tenconv/tensor.hpp"

namespace oracle {

using tenconv::Real;
using tenconv::Shape;
using tenconv::Tensor;

inline Tensor random_tensor(const Shape& shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Tensor t(shape);
  for (Real& v : t.data()) v = static_cast<Real>(dist(rng));
  return t;
}

/// Advances a multi-index over `dims`; false after the last one.
inline bool next_index(std::vector<std::size_t>& idx, const std::vector<std::size_t>& dims) {
  for (std::size_t a = idx.size(); a-- > 0;) {
    if (++idx[a] < dims[a]) return true;
    idx[a] = 0;
  }
  return false;
}

inline std::size_t flat(const std::vector<std::size_t>& idx, const std::vector<std::size_t>& dims) {
  std::size_t f = 0;
  for (std::size_t a = 0; a < dims.size(); ++a) f = f * dims[a] + idx[a];
  return f;
}

/// V[a..., p...] = sum_i U[a..., i_{r-1}, ..., i_0] * W[i_0, ..., i_{r-1}, p...]
/// by enumerating every (a, p, i) tuple.
inline Tensor contract(const Tensor& u, const Tensor& w, std::size_t r) {
  const std::vector<std::size_t>& ud = u.shape().dims();
  const std::vector<std::size_t>& wd = w.shape().dims();
  const std::size_t lead = ud.size() - r;
  std::vector<std::size_t> out_dims(ud.begin(), ud.begin() + static_cast<std::ptrdiff_t>(lead));
  out_dims.insert(out_dims.end(), wd.begin() + static_cast<std::ptrdiff_t>(r), wd.end());
  std::vector<std::size_t> pair_dims(wd.begin(), wd.begin() + static_cast<std::ptrdiff_t>(r));

  Tensor out{Shape(out_dims)};
  std::vector<std::size_t> o(out_dims.size(), 0);
  do {
    long double acc = 0;
    std::vector<std::size_t> i(r, 0);
    do {
      std::vector<std::size_t> ui(o.begin(), o.begin() + static_cast<std::ptrdiff_t>(lead));
      for (std::size_t t = 0; t < r; ++t) ui.push_back(i[r - 1 - t]);
      std::vector<std::size_t> wi(i);
      wi.insert(wi.end(), o.begin() + static_cast<std::ptrdiff_t>(lead), o.end());
      acc += static_cast<long double>(u[flat(ui, ud)]) * static_cast<long double>(w[flat(wi, wd)]);
    } while (next_index(i, pair_dims));
    out[flat(o, out_dims)] = static_cast<Real>(acc);
  } while (next_index(o, out_dims));
  return out;
}

struct ContractionCase {
  Tensor u;
  Tensor w;
  std::size_t r;
};

/// Random (U, W, r) with ranks in [1, 6], extents in [1, 4] and r in
/// [1, min(rank U, rank W)]. Cases whose oracle would enumerate more than
/// `max_terms` products are redrawn.
inline ContractionCase random_contraction(std::mt19937_64& rng, std::size_t max_terms = 1 << 17) {
  std::uniform_int_distribution<std::size_t> rank(1, 6), extent(1, 4);
  for (;;) {
    const std::size_t ru = rank(rng), rw = rank(rng);
    const std::size_t r = std::uniform_int_distribution<std::size_t>(1, std::min(ru, rw))(rng);
    std::vector<std::size_t> ud(ru), wd(rw);
    for (auto& d : ud) d = extent(rng);
    for (auto& d : wd) d = extent(rng);
    for (std::size_t t = 0; t < r; ++t) wd[t] = ud[ru - 1 - t];
    std::size_t terms = 1;
    for (auto d : ud) terms *= d;
    for (std::size_t t = r; t < rw; ++t) terms *= wd[t];
    if (terms > max_terms) continue;
    return {random_tensor(Shape(ud), rng), random_tensor(Shape(wd), rng), r};
  }
}

/// Tensor convolution by direct window enumeration. input [N, m, H, W,
/// cell...], weight [out, m, k, k, wcell...]; each output cell sums
/// contract(input cell, weight cell, r) over the zero-padded window.
inline Tensor tensor_conv(const Tensor& input, const Tensor& weight, std::size_t stride, std::size_t pad,
                          std::size_t r) {
  const Shape& is = input.shape();
  const Shape& ws = weight.shape();
  const std::size_t n = is[0], m = is[1], h = is[2], wdt = is[3];
  const std::size_t out_ch = ws[0], k = ws[2];
  const Shape in_cell = is.slice(4, is.rank());
  const Shape w_cell = ws.slice(4, ws.rank());
  const std::size_t oh = (h + 2 * pad - k) / stride + 1, ow = (wdt + 2 * pad - k) / stride + 1;

  Tensor probe_u(in_cell), probe_w(w_cell);
  const Shape out_cell = r == 0 ? in_cell.concat(w_cell) : contract(probe_u, probe_w, r).shape();
  Tensor out(Shape{n, out_ch, oh, ow}.concat(out_cell));
  const std::size_t icn = in_cell.numel(), wcn = w_cell.numel(), ocn = out_cell.numel();

  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t o = 0; o < out_ch; ++o)
      for (std::size_t y = 0; y < oh; ++y)
        for (std::size_t x = 0; x < ow; ++x)
          for (std::size_t c = 0; c < m; ++c)
            for (std::size_t ky = 0; ky < k; ++ky)
              for (std::size_t kx = 0; kx < k; ++kx) {
                const long iy = static_cast<long>(y * stride + ky) - static_cast<long>(pad);
                const long ix = static_cast<long>(x * stride + kx) - static_cast<long>(pad);
                if (iy < 0 || ix < 0 || iy >= static_cast<long>(h) || ix >= static_cast<long>(wdt)) continue;
                Tensor u(in_cell), wc(w_cell);
                const std::size_t ubase = (((b * m + c) * h + static_cast<std::size_t>(iy)) * wdt + static_cast<std::size_t>(ix)) * icn;
                const std::size_t wbase = (((o * m + c) * k + ky) * k + kx) * wcn;
                for (std::size_t e = 0; e < icn; ++e) u[e] = input[ubase + e];
                for (std::size_t e = 0; e < wcn; ++e) wc[e] = weight[wbase + e];
                Tensor v(out_cell);
                if (r == 0) {
                  for (std::size_t a = 0; a < icn; ++a)
                    for (std::size_t q = 0; q < wcn; ++q) v[a * wcn + q] = u[a] * wc[q];
                } else {
                  v = contract(u, wc, r);
                }
                const std::size_t obase = (((b * out_ch + o) * oh + y) * ow + x) * ocn;
                for (std::size_t e = 0; e < ocn; ++e) out[obase + e] += v[e];
              }
  return out;
}

inline double max_rel_error(const Tensor& a, const Tensor& b) {
  double worst = 0;
  for (std::size_t i = 0; i < a.numel(); ++i) {
    const double x = a[i], y = b[i];
    const double scale = std::max({std::abs(x), std::abs(y), 1e-300});
    worst = std::max(worst, std::abs(x - y) / scale);
  }
  return worst;
}

/// Error of `a` against `b` measured relative to `scale` elementwise
/// (e.g. the sum of absolute products, which bounds rounding error even
/// when the exact result cancels to near zero).
inline double max_scaled_error(const Tensor& a, const Tensor& b, const Tensor& scale) {
  double worst = 0;
  for (std::size_t i = 0; i < a.numel(); ++i) {
    const double s = std::max({std::abs(double(b[i])), double(scale[i]), 1e-300});
    worst = std::max(worst, std::abs(double(a[i]) - double(b[i])) / s);
  }
  return worst;
}

inline Tensor abs(const Tensor& t) {
  Tensor out(t.shape());
  for (std::size_t i = 0; i < t.numel(); ++i) out[i] = std::abs(t[i]);
  return out;
}

inline double max_abs_error(const Tensor& a, const Tensor& b) {
  double worst = 0;
  for (std::size_t i = 0; i < a.numel(); ++i) worst = std::max(worst, std::abs(double(a[i]) - double(b[i])));
  return worst;
}

}  // namespace oracle
