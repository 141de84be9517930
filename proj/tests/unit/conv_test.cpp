#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tenconv/contract.hpp"
#include "tenconv/conv.hpp"
#include "tenconv/error.hpp"
#include "tenconv/ops.hpp"

using namespace tenconv;

namespace {

TensorConvGeometry geometry(std::size_t m, std::size_t out, std::size_t h, std::size_t w, std::size_t k, std::size_t s,
                            std::size_t p, std::size_t r, Shape in_cell, Shape weight_cell) {
  TensorConvGeometry g;
  g.in_channels = m;
  g.out_channels = out;
  g.height = h;
  g.width = w;
  g.kernel = k;
  g.stride = s;
  g.pad = p;
  g.contract = r;
  g.in_cell = std::move(in_cell);
  g.weight_cell = std::move(weight_cell);
  return g;
}

}  // namespace

TEST(ConvGeometry, OutputExtents) {
  EXPECT_EQ(conv_out_extent(32, 3, 2, 0), 15u);
  EXPECT_EQ(conv_out_extent(15, 3, 2, 0), 7u);
  EXPECT_EQ(conv_out_extent(7, 3, 2, 0), 3u);
  EXPECT_EQ(conv_out_extent(3, 3, 1, 0), 1u);
  EXPECT_EQ(conv_out_extent(64, 3, 2, 0), 31u);
  EXPECT_EQ(conv_out_extent(15, 3, 1, 1), 15u);
  EXPECT_THROW(conv_out_extent(2, 3, 1, 0), BadGeometry);
  EXPECT_THROW(conv_out_extent(5, 3, 0, 0), BadGeometry);
}

TEST(ConvGeometry, Shapes) {
  TensorConvGeometry g = geometry(1, 1, 32, 32, 3, 2, 0, 2, Shape{3, 1}, Shape{1, 3, 6, 6, 6, 6});
  g.validate();
  EXPECT_EQ(g.out_cell(), (Shape{6, 6, 6, 6}));
  EXPECT_EQ(g.output_shape(4), (Shape{4, 1, 15, 15, 6, 6, 6, 6}));
  EXPECT_EQ(g.summands(), 9u);
}

TEST(ConvGeometry, Mismatch) {
  TensorConvGeometry g = geometry(1, 1, 5, 5, 3, 1, 0, 2, Shape{3, 1}, Shape{3, 1, 2});
  EXPECT_THROW(g.validate(), ShapeMismatch);
}

TEST(TensorConv, MatchesNestedLoopOracle) {
  std::mt19937_64 rng(1);
  TensorConvGeometry g = geometry(2, 3, 5, 5, 3, 1, 0, 1, Shape{2, 2}, Shape{2, 2});
  Tensor x = oracle::random_tensor(g.input_shape(2), rng);
  Tensor w = oracle::random_tensor(g.weight_shape(), rng);
  Tensor y = tensor_conv_forward(x, w, g);
  Tensor ref = oracle::tensor_conv(x, w, 1, 0, 1);
  ASSERT_EQ(y.shape(), ref.shape());
  EXPECT_LT(oracle::max_abs_error(y, ref), 1e-13);
}

TEST(TensorConv, OracleAcrossModesAndGeometries) {
  std::mt19937_64 rng(2);
  struct Case {
    TensorConvGeometry g;
  };
  std::vector<TensorConvGeometry> cases{
      geometry(1, 2, 6, 7, 3, 2, 0, 2, Shape{3, 1}, Shape{1, 3, 2, 2}),        // expand
      geometry(2, 2, 5, 5, 3, 1, 1, 2, Shape{2, 3, 2}, Shape{2, 3, 2}),        // preserve
      geometry(3, 4, 3, 3, 3, 1, 0, 3, Shape{2, 2, 2}, Shape{2, 2, 2}),        // compress to scalars
      geometry(2, 2, 4, 4, 2, 2, 1, 1, Shape{3}, Shape{3, 2, 2}),              // expand, even kernel
      geometry(2, 3, 6, 5, 3, 2, 1, 0, Shape{}, Shape{}),                      // scalar convolution
  };
  for (const TensorConvGeometry& g : cases) {
    Tensor x = oracle::random_tensor(g.input_shape(2), rng);
    Tensor w = oracle::random_tensor(g.weight_shape(), rng);
    Tensor y = tensor_conv_forward(x, w, g);
    Tensor ref = oracle::tensor_conv(x, w, g.stride, g.pad, g.contract);
    ASSERT_EQ(y.shape(), ref.shape()) << g.in_cell.str();
    EXPECT_LT(oracle::max_abs_error(y, ref), 1e-12) << g.in_cell.str();
  }
}

TEST(TensorConv, IdentityKernel) {
  // k = 1, one channel, W contracting [2,3] cells back to themselves.
  std::mt19937_64 rng(3);
  TensorConvGeometry g = geometry(1, 1, 4, 4, 1, 1, 0, 1, Shape{2, 3}, Shape{3, 3});
  Tensor w(g.weight_shape());
  for (std::size_t i = 0; i < 3; ++i) w[i * 3 + i] = 1;
  Tensor x = oracle::random_tensor(g.input_shape(2), rng);
  EXPECT_TRUE(identical(tensor_conv_forward(x, w, g), x));
}

TEST(TensorConv, WindowDecomposition) {
  // Each output cell equals linear_combine over the window of contract(U_i, W_i, r).
  std::mt19937_64 rng(4);
  TensorConvGeometry g = geometry(2, 2, 5, 5, 3, 1, 0, 2, Shape{2, 2, 2}, Shape{2, 2, 3});
  Tensor x = oracle::random_tensor(g.input_shape(1), rng);
  Tensor w = oracle::random_tensor(g.weight_shape(), rng);
  Tensor y = tensor_conv_forward(x, w, g);
  const Tensor map = x.reshaped(Shape{2, 5, 5, 2, 2, 2});
  const std::size_t ocn = g.out_cell().numel();
  double worst = 0;
  for (std::size_t o = 0; o < 2; ++o)
    for (std::size_t oy = 0; oy < 3; ++oy)
      for (std::size_t ox = 0; ox < 3; ++ox) {
        Tensor window = slice_window(map, oy, ox, 3);
        std::vector<Tensor> terms;
        for (std::size_t c = 0; c < 2; ++c)
          for (std::size_t ky = 0; ky < 3; ++ky)
            for (std::size_t kx = 0; kx < 3; ++kx) {
              Tensor u(Shape{2, 2, 2}), wc(Shape{2, 2, 3});
              for (std::size_t e = 0; e < 8; ++e) u[e] = window[((c * 3 + ky) * 3 + kx) * 8 + e];
              for (std::size_t e = 0; e < 12; ++e) wc[e] = w[(((o * 2 + c) * 3 + ky) * 3 + kx) * 12 + e];
              terms.push_back(contract(u, wc, 2));
            }
        Tensor cell = linear_combine(terms);
        for (std::size_t e = 0; e < ocn; ++e) {
          worst = std::max(worst, std::abs(cell[e] - y[((o * 3 + oy) * 3 + ox) * ocn + e]));
        }
      }
  EXPECT_LT(worst, 1e-12);
}

TEST(TensorConv, ZeroInputGivesZeroOutput) {
  std::mt19937_64 rng(5);
  TensorConvGeometry g = geometry(1, 1, 7, 7, 3, 2, 0, 2, Shape{3, 1}, Shape{1, 3, 2, 2, 2, 2});
  Tensor w = oracle::random_tensor(g.weight_shape(), rng);
  Tensor y = tensor_conv_forward(Tensor(g.input_shape(2)), w, g);
  for (Real v : y.data()) EXPECT_EQ(v, 0);
}

TEST(TensorConv, ChunkingDoesNotChangeResult) {
  // A batch large enough to be split into several lowering chunks gives the
  // same result as per-sample evaluation.
  std::mt19937_64 rng(6);
  TensorConvGeometry g = geometry(1, 2, 9, 9, 3, 1, 1, 1, Shape{4, 4}, Shape{4, 4});
  const std::size_t n = 200;
  Tensor x = oracle::random_tensor(g.input_shape(n), rng);
  Tensor w = oracle::random_tensor(g.weight_shape(), rng);
  Tensor y = tensor_conv_forward(x, w, g);
  const std::size_t in_per = x.numel() / n, out_per = y.numel() / n;
  for (std::size_t i : {std::size_t{0}, std::size_t{97}, n - 1}) {
    Tensor xi(g.input_shape(1));
    std::copy_n(x.raw() + i * in_per, in_per, xi.raw());
    Tensor yi = tensor_conv_forward(xi, w, g);
    for (std::size_t e = 0; e < out_per; ++e) EXPECT_EQ(yi[e], y[i * out_per + e]);
  }
}

TEST(TensorConv, BackwardMatchesAdjointIdentity) {
  // <conv(x, w), g> is bilinear, so <dx, x> = <dw, w> = <y, g>.
  std::mt19937_64 rng(7);
  TensorConvGeometry g = geometry(2, 3, 6, 6, 3, 2, 1, 2, Shape{2, 2, 2}, Shape{2, 2, 3});
  Tensor x = oracle::random_tensor(g.input_shape(2), rng);
  Tensor w = oracle::random_tensor(g.weight_shape(), rng);
  Tensor y = tensor_conv_forward(x, w, g);
  Tensor up = oracle::random_tensor(y.shape(), rng);
  Tensor dx(x.shape()), dw(w.shape());
  tensor_conv_backward(x, w, up, &dx, &dw, g);
  double yg = 0, xdx = 0, wdw = 0;
  for (std::size_t i = 0; i < y.numel(); ++i) yg += y[i] * up[i];
  for (std::size_t i = 0; i < x.numel(); ++i) xdx += x[i] * dx[i];
  for (std::size_t i = 0; i < w.numel(); ++i) wdw += w[i] * dw[i];
  EXPECT_NEAR(xdx, yg, 1e-10 * std::abs(yg) + 1e-12);
  EXPECT_NEAR(wdw, yg, 1e-10 * std::abs(yg) + 1e-12);
}

TEST(TensorConv, ShapeErrors) {
  TensorConvGeometry g = geometry(1, 1, 5, 5, 3, 1, 0, 1, Shape{2}, Shape{2, 2});
  EXPECT_THROW(tensor_conv_forward(Tensor(Shape{1, 1, 5, 5, 3}), Tensor(g.weight_shape()), g), ShapeMismatch);
  EXPECT_THROW(tensor_conv_forward(Tensor(g.input_shape(1)), Tensor(Shape{1, 1, 3, 3, 2, 3}), g), ShapeMismatch);
}
