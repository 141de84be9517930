#include "tenconv/conv.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "gemm.hpp"
#include "tenconv/contract.hpp"
#include "tenconv/error.hpp"

namespace tenconv {

std::size_t conv_out_extent(std::size_t in, std::size_t kernel, std::size_t stride, std::size_t pad) {
  if (kernel == 0 || stride == 0) throw BadGeometry("kernel and stride must be positive");
  if (in + 2 * pad < kernel) {
    throw BadGeometry("kernel " + std::to_string(kernel) + " does not fit extent " + std::to_string(in) +
                      " with pad " + std::to_string(pad));
  }
  return (in + 2 * pad - kernel) / stride + 1;
}

void TensorConvGeometry::validate() const {
  if (in_channels == 0 || out_channels == 0 || height == 0 || width == 0) {
    throw BadGeometry("channel and spatial extents must be positive");
  }
  if (contract > in_cell.rank() || contract > weight_cell.rank()) {
    throw RankError("contract count " + std::to_string(contract) + " exceeds cell ranks " + in_cell.str() + " / " +
                    weight_cell.str());
  }
  for (std::size_t t = 0; t < contract; ++t) {
    const std::size_t axis = in_cell.rank() - 1 - t;
    if (in_cell[axis] != weight_cell[t]) {
      throw ShapeMismatch("input cell " + in_cell.str() + " axis " + std::to_string(axis) +
                          " does not pair with neuron tensor " + weight_cell.str() + " axis " + std::to_string(t));
    }
  }
  (void)out_height();
  (void)out_width();
}

std::size_t TensorConvGeometry::out_height() const { return conv_out_extent(height, kernel, stride, pad); }
std::size_t TensorConvGeometry::out_width() const { return conv_out_extent(width, kernel, stride, pad); }
Shape TensorConvGeometry::out_cell() const { return kept_cell().concat(produced_cell()); }

Shape TensorConvGeometry::input_shape(std::size_t batch) const {
  return Shape{batch, in_channels, height, width}.concat(in_cell);
}

Shape TensorConvGeometry::weight_shape() const {
  return Shape{out_channels, in_channels, kernel, kernel}.concat(weight_cell);
}

Shape TensorConvGeometry::output_shape(std::size_t batch) const {
  return Shape{batch, out_channels, out_height(), out_width()}.concat(out_cell());
}

namespace {

// Lowering of the convolution to a matrix product:
//   rows    (n, oy, ox, l)      l runs over the kept cell extents
//   inner   (c, ky, kx, j)      j runs over the paired extents in weight order
//   columns (o, p)              p runs over the produced extents
struct Lowering {
  std::size_t batch, m, o, h, w, k, s, pad, ho, wo;
  std::size_t q;   // input cell size
  std::size_t l;   // kept
  std::size_t kc;  // paired
  std::size_t p;   // produced
  std::size_t rows_per_image() const { return ho * wo * l; }
  std::size_t inner() const { return m * k * k * kc; }
  std::size_t cols() const { return o * p; }
  std::vector<std::size_t> perm;

  Lowering(const TensorConvGeometry& g, std::size_t n)
      : batch(n), m(g.in_channels), o(g.out_channels), h(g.height), w(g.width), k(g.kernel), s(g.stride),
        pad(g.pad), ho(g.out_height()), wo(g.out_width()), q(g.in_cell.numel()), l(g.kept_cell().numel()),
        kc(g.paired_cell().numel()), p(g.produced_cell().numel()), perm(contraction_permutation(g.paired_cell())) {}

  // Images per chunk so the column buffer stays around 4M elements.
  std::size_t chunk() const {
    const std::size_t per_image = rows_per_image() * std::max(inner(), cols());
    return std::clamp<std::size_t>((std::size_t{1} << 22) / std::max<std::size_t>(per_image, 1), 1, batch);
  }

  void im2col(const Real* input, std::size_t n0, std::size_t n1, Real* col) const {
    const std::size_t kt = inner();
    for (std::size_t n = n0; n < n1; ++n) {
      for (std::size_t oy = 0; oy < ho; ++oy) {
        for (std::size_t ox = 0; ox < wo; ++ox) {
          for (std::size_t li = 0; li < l; ++li) {
            Real* dst = col + ((((n - n0) * ho + oy) * wo + ox) * l + li) * kt;
            for (std::size_t c = 0; c < m; ++c) {
              for (std::size_t ky = 0; ky < k; ++ky) {
                const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * s + ky) - static_cast<std::ptrdiff_t>(pad);
                for (std::size_t kx = 0; kx < k; ++kx, dst += kc) {
                  const std::ptrdiff_t ix =
                      static_cast<std::ptrdiff_t>(ox * s + kx) - static_cast<std::ptrdiff_t>(pad);
                  if (iy < 0 || ix < 0 || iy >= static_cast<std::ptrdiff_t>(h) ||
                      ix >= static_cast<std::ptrdiff_t>(w)) {
                    std::fill(dst, dst + kc, Real(0));
                    continue;
                  }
                  const Real* src = input + (((n * m + c) * h + static_cast<std::size_t>(iy)) * w +
                                             static_cast<std::size_t>(ix)) * q + li * kc;
                  for (std::size_t j = 0; j < kc; ++j) dst[j] = src[perm[j]];
                }
              }
            }
          }
        }
      }
    }
  }

  void col2im(const Real* col, std::size_t n0, std::size_t n1, Real* grad_input) const {
    const std::size_t kt = inner();
    for (std::size_t n = n0; n < n1; ++n) {
      for (std::size_t oy = 0; oy < ho; ++oy) {
        for (std::size_t ox = 0; ox < wo; ++ox) {
          for (std::size_t li = 0; li < l; ++li) {
            const Real* src = col + ((((n - n0) * ho + oy) * wo + ox) * l + li) * kt;
            for (std::size_t c = 0; c < m; ++c) {
              for (std::size_t ky = 0; ky < k; ++ky) {
                const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * s + ky) - static_cast<std::ptrdiff_t>(pad);
                for (std::size_t kx = 0; kx < k; ++kx, src += kc) {
                  const std::ptrdiff_t ix =
                      static_cast<std::ptrdiff_t>(ox * s + kx) - static_cast<std::ptrdiff_t>(pad);
                  if (iy < 0 || ix < 0 || iy >= static_cast<std::ptrdiff_t>(h) ||
                      ix >= static_cast<std::ptrdiff_t>(w)) {
                    continue;
                  }
                  Real* dst = grad_input + (((n * m + c) * h + static_cast<std::size_t>(iy)) * w +
                                            static_cast<std::size_t>(ix)) * q + li * kc;
                  for (std::size_t j = 0; j < kc; ++j) dst[perm[j]] += src[j];
                }
              }
            }
          }
        }
      }
    }
  }

  // weight [o, (c, ky, kx, j), p]  ->  matrix [(c, ky, kx, j), (o, p)]
  std::vector<Real> weight_matrix(const Real* weight) const {
    const std::size_t kt = inner();
    std::vector<Real> mat(kt * cols());
    for (std::size_t oi = 0; oi < o; ++oi) {
      for (std::size_t r = 0; r < kt; ++r) {
        const Real* src = weight + (oi * kt + r) * p;
        std::copy(src, src + p, mat.data() + r * cols() + oi * p);
      }
    }
    return mat;
  }

  void add_weight_grad(const std::vector<Real>& mat, Real* grad_weight) const {
    const std::size_t kt = inner();
    for (std::size_t oi = 0; oi < o; ++oi) {
      for (std::size_t r = 0; r < kt; ++r) {
        const Real* src = mat.data() + r * cols() + oi * p;
        Real* dst = grad_weight + (oi * kt + r) * p;
        for (std::size_t pi = 0; pi < p; ++pi) dst[pi] += src[pi];
      }
    }
  }

  // Product rows (n, pos, l) x cols (o, p)  <->  output [n, o, pos, l, p].
  void scatter_output(const Real* prod, std::size_t n0, std::size_t n1, Real* output) const {
    const std::size_t positions = ho * wo;
    for (std::size_t n = n0; n < n1; ++n) {
      for (std::size_t pos = 0; pos < positions; ++pos) {
        for (std::size_t li = 0; li < l; ++li) {
          const Real* src = prod + (((n - n0) * positions + pos) * l + li) * cols();
          for (std::size_t oi = 0; oi < o; ++oi) {
            Real* dst = output + (((n * o + oi) * positions + pos) * l + li) * p;
            std::copy(src + oi * p, src + (oi + 1) * p, dst);
          }
        }
      }
    }
  }

  void gather_output(const Real* output, std::size_t n0, std::size_t n1, Real* prod) const {
    const std::size_t positions = ho * wo;
    for (std::size_t n = n0; n < n1; ++n) {
      for (std::size_t pos = 0; pos < positions; ++pos) {
        for (std::size_t li = 0; li < l; ++li) {
          Real* dst = prod + (((n - n0) * positions + pos) * l + li) * cols();
          for (std::size_t oi = 0; oi < o; ++oi) {
            const Real* src = output + (((n * o + oi) * positions + pos) * l + li) * p;
            std::copy(src, src + p, dst + oi * p);
          }
        }
      }
    }
  }
};

void check_operands(const Tensor& input, const Tensor& weight, const TensorConvGeometry& g) {
  g.validate();
  if (input.rank() != 4 + g.in_cell.rank()) {
    throw ShapeMismatch("feature map " + input.shape().str() + " does not carry cells " + g.in_cell.str());
  }
  if (!(input.shape() == g.input_shape(input.shape()[0]))) {
    throw ShapeMismatch("feature map " + input.shape().str() + ", expected " + g.input_shape(input.shape()[0]).str());
  }
  if (!(weight.shape() == g.weight_shape())) {
    throw ShapeMismatch("neuron tensors " + weight.shape().str() + ", expected " + g.weight_shape().str());
  }
}

}  // namespace

Tensor tensor_conv_forward(const Tensor& input, const Tensor& weight, const TensorConvGeometry& g) {
  check_operands(input, weight, g);
  const std::size_t batch = input.shape()[0];
  const Lowering lw(g, batch);
  Tensor output(g.output_shape(batch));

  const std::vector<Real> wmat = lw.weight_matrix(weight.raw());
  const std::size_t chunk = lw.chunk();
  std::vector<Real> col(chunk * lw.rows_per_image() * lw.inner());
  std::vector<Real> prod(chunk * lw.rows_per_image() * lw.cols());
  for (std::size_t n0 = 0; n0 < batch; n0 += chunk) {
    const std::size_t n1 = std::min(batch, n0 + chunk);
    const std::size_t rows = (n1 - n0) * lw.rows_per_image();
    lw.im2col(input.raw(), n0, n1, col.data());
    detail::gemm_nn(col.data(), wmat.data(), prod.data(), rows, lw.inner(), lw.cols(), false);
    lw.scatter_output(prod.data(), n0, n1, output.raw());
  }
  return output;
}

void tensor_conv_backward(const Tensor& input, const Tensor& weight, const Tensor& grad_output,
                          Tensor* grad_input, Tensor* grad_weight, const TensorConvGeometry& g) {
  check_operands(input, weight, g);
  const std::size_t batch = input.shape()[0];
  if (!(grad_output.shape() == g.output_shape(batch))) {
    throw ShapeMismatch("output gradient " + grad_output.shape().str() + ", expected " +
                        g.output_shape(batch).str());
  }
  if (!grad_input && !grad_weight) return;
  const Lowering lw(g, batch);

  const std::vector<Real> wmat = lw.weight_matrix(weight.raw());
  std::vector<Real> wgrad(grad_weight ? wmat.size() : 0);
  const std::size_t chunk = lw.chunk();
  std::vector<Real> col(chunk * lw.rows_per_image() * lw.inner());
  std::vector<Real> dprod(chunk * lw.rows_per_image() * lw.cols());
  bool first = true;
  for (std::size_t n0 = 0; n0 < batch; n0 += chunk) {
    const std::size_t n1 = std::min(batch, n0 + chunk);
    const std::size_t rows = (n1 - n0) * lw.rows_per_image();
    lw.gather_output(grad_output.raw(), n0, n1, dprod.data());
    if (grad_weight) {
      lw.im2col(input.raw(), n0, n1, col.data());
      detail::gemm_tn(col.data(), dprod.data(), wgrad.data(), lw.inner(), rows, lw.cols(), !first);
      first = false;
    }
    if (grad_input) {
      detail::gemm_nt(dprod.data(), wmat.data(), col.data(), rows, lw.cols(), lw.inner(), false);
      lw.col2im(col.data(), n0, n1, grad_input->raw());
    }
  }
  if (grad_weight) lw.add_weight_grad(wgrad, grad_weight->raw());
}

}  // namespace tenconv
