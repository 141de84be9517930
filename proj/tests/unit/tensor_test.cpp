#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"
#include "tenconv/error.hpp"
#include "tenconv/serialize.hpp"
#include "tenconv/tensor.hpp"

using namespace tenconv;

TEST(Shape, RankAndCount) {
  Shape s{2, 3, 4};
  EXPECT_EQ(s.rank(), 3u);
  EXPECT_EQ(s.numel(), 24u);
  EXPECT_EQ(Shape{}.rank(), 0u);
  EXPECT_EQ(Shape{}.numel(), 1u);
  EXPECT_EQ(s.str(), "[2,3,4]");
}

TEST(Shape, SliceReverseConcat) {
  Shape s{1, 2, 3, 4};
  EXPECT_EQ(s.slice(1, 3), (Shape{2, 3}));
  EXPECT_EQ(s.reversed(), (Shape{4, 3, 2, 1}));
  EXPECT_EQ(Shape{5}.concat(Shape{6, 7}), (Shape{5, 6, 7}));
  EXPECT_THROW(s.slice(2, 5), OutOfBounds);
}

TEST(Shape, ZeroExtentRejected) { EXPECT_THROW((Shape{2, 0, 3}), ShapeMismatch); }

TEST(Shape, OverflowRejected) {
  const std::size_t big = std::size_t{1} << 40;
  EXPECT_THROW((Shape{big, big}), ShapeMismatch);
}

TEST(Tensor, RowMajorLayout) {
  Tensor t(Shape{2, 3}, {0, 1, 2, 3, 4, 5});
  EXPECT_EQ(t.at({1, 0}), 3);
  EXPECT_EQ(t.at({0, 2}), 2);
  const std::vector<std::size_t> strides = strides_of(Shape{2, 3, 4});
  EXPECT_EQ(strides, (std::vector<std::size_t>{12, 4, 1}));
}

TEST(Tensor, AtOutOfBounds) {
  Tensor t(Shape{2, 2});
  EXPECT_THROW(t.at({2, 0}), OutOfBounds);
  EXPECT_THROW(t.at({0}), OutOfBounds);
}

TEST(Tensor, DataLengthMustMatch) { EXPECT_THROW(Tensor(Shape{2, 2}, {1, 2, 3}), ShapeMismatch); }

TEST(Tensor, ReshapeKeepsOrder) {
  Tensor t(Shape{2, 3}, {0, 1, 2, 3, 4, 5});
  Tensor r = t.reshaped(Shape{6});
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(r[i], static_cast<Real>(i));
  EXPECT_THROW(t.reshaped(Shape{4}), ShapeMismatch);
}

TEST(Tensor, ItemAndScalar) {
  EXPECT_EQ(Tensor::scalar(2.5).item(), 2.5);
  EXPECT_EQ(Tensor::scalar(2.5).rank(), 0u);
  EXPECT_THROW(Tensor(Shape{2}).item(), ShapeMismatch);
}

TEST(Tensor, Accumulate) {
  Tensor a = Tensor::full(Shape{3}, 1);
  a.accumulate(Tensor::full(Shape{3}, 2));
  EXPECT_EQ(a[2], 3);
  EXPECT_THROW(a.accumulate(Tensor(Shape{4})), ShapeMismatch);
}

TEST(Tensor, AllFinite) {
  Tensor t(Shape{2});
  EXPECT_TRUE(t.all_finite());
  t[1] = std::numeric_limits<Real>::infinity();
  EXPECT_FALSE(t.all_finite());
}

TEST(Serialize, RoundTripIsBitwise) {
  std::mt19937_64 rng(3);
  Tensor t = oracle::random_tensor(Shape{2, 3, 4}, rng);
  std::stringstream buf;
  write_tensor(buf, t);
  EXPECT_EQ(buf.str().size(), 4 + 3 * 4 + 24 * 8u);
  EXPECT_TRUE(identical(read_tensor(buf), t));
}

TEST(Serialize, LittleEndianLayout) {
  std::stringstream buf;
  write_tensor(buf, Tensor(Shape{1}, {1.0}));
  const std::string s = buf.str();
  const unsigned char expected[] = {1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0xf0, 0x3f};
  ASSERT_EQ(s.size(), sizeof expected);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(static_cast<unsigned char>(s[i]), expected[i]) << i;
}

TEST(Serialize, ScalarRecord) {
  std::stringstream buf;
  write_tensor(buf, Tensor::scalar(-3.25));
  Tensor t = read_tensor(buf);
  EXPECT_EQ(t.rank(), 0u);
  EXPECT_EQ(t.item(), -3.25);
}

TEST(Serialize, TruncatedRecordFails) {
  std::stringstream buf;
  write_tensor(buf, Tensor::full(Shape{4}, 1));
  std::string s = buf.str();
  s.resize(s.size() - 3);
  std::stringstream cut(s);
  EXPECT_THROW(read_tensor(cut), FormatError);
}

TEST(Serialize, ImplausibleRankFails) {
  std::stringstream buf;
  write_u32(buf, 1000);
  EXPECT_THROW(read_tensor(buf), FormatError);
}
