#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "ravnet/ops.hpp"
#include "ravnet/rng.hpp"
#include "ravnet/tensor.hpp"

using ravnet::Dims;
using ravnet::SplitMix64;
using ravnet::Tensor;

namespace {

Tensor<double> make_seq(Dims d) {
  Tensor<double> t = Tensor<double>::zeros(d);
  auto v = t.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i + 1);
  return t;
}

}  // namespace

TEST(Dims, CountAndIndex) {
  Dims d{2, 3, 4, 5};
  EXPECT_EQ(d.count(), 2u * 3 * 4 * 5);
  EXPECT_EQ(d.index(0, 0, 0, 0), 0u);
  EXPECT_EQ(d.index(0, 0, 0, 1), 1u);
  EXPECT_EQ(d.index(0, 0, 1, 0), 5u);
  EXPECT_EQ(d.index(0, 1, 0, 0), 20u);
  EXPECT_EQ(d.index(1, 0, 0, 0), 60u);
}

TEST(Tensor, FactoryRejectsNonPositiveDims) {
  EXPECT_THROW(Tensor<float>::zeros({0, 1, 2, 2}), ravnet::ShapeError);
  EXPECT_THROW(Tensor<float>::zeros({1, 1, -3, 2}), ravnet::ShapeError);
}

TEST(Tensor, ItemRequiresScalar) {
  EXPECT_DOUBLE_EQ(Tensor<double>::scalar(2.5).item(), 2.5);
  EXPECT_THROW(Tensor<double>::zeros({1, 1, 2, 2}).item(), ravnet::ShapeError);
}

TEST(Tensor, CloneIsDeepCopy) {
  Tensor<double> a = make_seq({1, 2, 2, 2});
  Tensor<double> b = a.clone();
  b.values()[0] = -7.0;
  EXPECT_EQ(a.values()[0], 1.0);
  EXPECT_FALSE(a.same_storage(b));
}

TEST(Elementwise, SigmoidOfZeroIsHalf) {
  Tensor<double> x = Tensor<double>::zeros({1, 2, 3, 3});
  Tensor<double> y = ravnet::sigmoid(x);
  for (double v : y.values()) EXPECT_DOUBLE_EQ(v, 0.5);
}

TEST(Elementwise, AddZerosIsIdentity) {
  SplitMix64 rng(11);
  Tensor<double> x = Tensor<double>::randn({1, 3, 4, 4}, rng);
  Tensor<double> y = ravnet::add(x, ravnet::zeros_like(x));
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(x.values()[i], y.values()[i]);
}

TEST(Elementwise, ShapeMismatchThrows) {
  Tensor<double> a = Tensor<double>::zeros({1, 1, 2, 2});
  Tensor<double> b = Tensor<double>::zeros({1, 1, 2, 3});
  EXPECT_THROW(ravnet::add(a, b), ravnet::ShapeError);
  EXPECT_THROW(ravnet::mul(a, b), ravnet::ShapeError);
}

TEST(Elementwise, LogRejectsNonPositive) {
  Tensor<double> x = Tensor<double>::full({1, 1, 1, 2}, 1.0);
  x.values()[1] = 0.0;
  EXPECT_THROW(ravnet::log(x), ravnet::DomainError);
  x.values()[1] = -1.0;
  EXPECT_THROW(ravnet::log(x), ravnet::DomainError);
}

TEST(Elementwise, ClampBounds) {
  Tensor<double> x = make_seq({1, 1, 1, 4});  // 1 2 3 4
  Tensor<double> y = ravnet::clamp(x, 1.5, 3.5);
  const std::vector<double> want{1.5, 2.0, 3.0, 3.5};
  for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(y.values()[i], want[i]);
}

TEST(Matmul, IdentityLeavesMatrixUnchanged) {
  SplitMix64 rng(3);
  Tensor<double> m = Tensor<double>::randn({1, 1, 3, 3}, rng);
  Tensor<double> eye = Tensor<double>::zeros({1, 1, 3, 3});
  for (int i = 0; i < 3; ++i) eye.at(0, 0, i, i) = 1.0;
  Tensor<double> y = ravnet::matmul(eye, m);
  for (std::size_t i = 0; i < m.size(); ++i) EXPECT_DOUBLE_EQ(y.values()[i], m.values()[i]);
}

TEST(Matmul, HandExample) {
  Tensor<double> a = make_seq({1, 1, 2, 2});  // [[1,2],[3,4]]
  Tensor<double> b = Tensor<double>::full({1, 1, 2, 1}, 1.0);
  Tensor<double> y = ravnet::matmul(a, b);
  EXPECT_EQ(y.dims(), (Dims{1, 1, 2, 1}));
  EXPECT_DOUBLE_EQ(y.values()[0], 3.0);
  EXPECT_DOUBLE_EQ(y.values()[1], 7.0);
}

TEST(Matmul, InnerMismatchThrows) {
  Tensor<double> a = Tensor<double>::zeros({1, 1, 2, 3});
  Tensor<double> b = Tensor<double>::zeros({1, 1, 2, 2});
  EXPECT_THROW(ravnet::matmul(a, b), ravnet::ShapeError);
  EXPECT_THROW(ravnet::matmul(Tensor<double>::zeros({1, 2, 2, 2}), b), ravnet::ShapeError);
}

TEST(Reshape, PreservesFlatOrder) {
  Tensor<double> t = make_seq({1, 4, 2, 2});
  Tensor<double> r = ravnet::reshape(t, {1, 4, 4, 1});
  EXPECT_DOUBLE_EQ(r.values()[5], t.values()[5]);
  EXPECT_THROW(ravnet::reshape(t, {1, 4, 4, 4}), ravnet::ShapeError);
}

TEST(Reshape, RoundTripBitExact) {
  SplitMix64 rng(5);
  Tensor<double> t = Tensor<double>::randn({2, 3, 4, 5}, rng);
  Tensor<double> back = ravnet::reshape(ravnet::reshape(t, {1, 1, 6, 20}), t.dims());
  ASSERT_EQ(back.size(), t.size());
  EXPECT_EQ(std::memcmp(back.values().data(), t.values().data(), t.size() * sizeof(double)), 0);
}

TEST(Transpose, HandExample) {
  Tensor<double> t = make_seq({1, 1, 2, 3});  // [[1,2,3],[4,5,6]]
  Tensor<double> y = ravnet::transpose_last2(t);
  EXPECT_EQ(y.dims(), (Dims{1, 1, 3, 2}));
  const std::vector<double> want{1, 4, 2, 5, 3, 6};
  for (int i = 0; i < 6; ++i) EXPECT_DOUBLE_EQ(y.values()[i], want[i]);
}

TEST(Transpose, DoubleTransposeBitExact) {
  SplitMix64 rng(9);
  Tensor<double> t = Tensor<double>::randn({2, 2, 3, 4}, rng);
  Tensor<double> back = ravnet::transpose_last2(ravnet::transpose_last2(t));
  EXPECT_EQ(std::memcmp(back.values().data(), t.values().data(), t.size() * sizeof(double)), 0);
}

TEST(Concat, FourPartsReachTargetChannels) {
  SplitMix64 rng(2);
  std::vector<Tensor<double>> parts;
  for (int k = 0; k < 4; ++k) parts.push_back(Tensor<double>::randn({1, 4, 8, 8}, rng));
  Tensor<double> y = ravnet::concat_channels(parts);
  EXPECT_EQ(y.dims(), (Dims{1, 16, 8, 8}));
  // Part k occupies channels [4k, 4k+4).
  for (int k = 0; k < 4; ++k) {
    for (int c = 0; c < 4; ++c) {
      EXPECT_EQ(y.at(0, 4 * k + c, 3, 5), parts[k].at(0, c, 3, 5));
    }
  }
}

TEST(Concat, SingleInputIsIdentity) {
  SplitMix64 rng(4);
  Tensor<double> t = Tensor<double>::randn({2, 3, 4, 4}, rng);
  Tensor<double> y = ravnet::concat_channels({t});
  EXPECT_EQ(y.dims(), t.dims());
  EXPECT_EQ(std::memcmp(y.values().data(), t.values().data(), t.size() * sizeof(double)), 0);
}

TEST(Concat, ErrorCases) {
  EXPECT_THROW(ravnet::concat_channels(std::vector<Tensor<double>>{}), ravnet::EmptyInputError);
  Tensor<double> a = Tensor<double>::zeros({1, 2, 4, 4});
  Tensor<double> b = Tensor<double>::zeros({1, 2, 4, 5});
  EXPECT_THROW(ravnet::concat_channels({a, b}), ravnet::ShapeError);
}

TEST(ConcatBatch, StacksAndSlices) {
  SplitMix64 rng(6);
  Tensor<double> a = Tensor<double>::randn({1, 2, 3, 3}, rng);
  Tensor<double> b = Tensor<double>::randn({1, 2, 3, 3}, rng);
  Tensor<double> y = ravnet::concat_batch({a, b});
  EXPECT_EQ(y.dims(), (Dims{2, 2, 3, 3}));
  Tensor<double> s1 = ravnet::slice_batch(y, 1);
  EXPECT_EQ(std::memcmp(s1.values().data(), b.values().data(), b.size() * sizeof(double)), 0);
  EXPECT_THROW(ravnet::slice_batch(y, 2), ravnet::ShapeError);
}

TEST(Reduce, SumAndMean) {
  EXPECT_DOUBLE_EQ(ravnet::reduce_sum(Tensor<double>::ones({1, 1, 2, 2})).item(), 4.0);
  Tensor<double> t = Tensor<double>::zeros({1, 1, 1, 2});
  t.values()[0] = 2.0;
  t.values()[1] = 4.0;
  EXPECT_DOUBLE_EQ(ravnet::reduce_mean(t).item(), 3.0);
}

TEST(Softmax, UniformLogits) {
  Tensor<double> t = Tensor<double>::full({1, 1, 1, 4}, 0.7);
  Tensor<double> y = ravnet::softmax_axis(t, 1);
  for (double v : y.values()) EXPECT_NEAR(v, 0.25, 1e-12);
}

TEST(Softmax, HandExample) {
  Tensor<double> t = Tensor<double>::zeros({1, 1, 1, 2});
  t.values()[1] = std::log(3.0);
  Tensor<double> y = ravnet::softmax_axis(t, 1);
  EXPECT_NEAR(y.values()[0], 0.25, 1e-12);
  EXPECT_NEAR(y.values()[1], 0.75, 1e-12);
}

TEST(Softmax, AxisZeroColumnsSumToOne) {
  SplitMix64 rng(8);
  Tensor<double> t = Tensor<double>::randn({1, 1, 5, 7}, rng);
  Tensor<double> y = ravnet::softmax_axis(t, 0);
  for (int j = 0; j < 7; ++j) {
    double colsum = 0.0;
    for (int i = 0; i < 5; ++i) {
      EXPECT_GT(y.at(0, 0, i, j), 0.0);
      colsum += y.at(0, 0, i, j);
    }
    EXPECT_NEAR(colsum, 1.0, 1e-6);
  }
}

TEST(Softmax, LargeLogitsStayFinite) {
  Tensor<double> t = Tensor<double>::full({1, 1, 1, 3}, 1e4);
  Tensor<double> y = ravnet::softmax_axis(t, 1);
  for (double v : y.values()) EXPECT_NEAR(v, 1.0 / 3.0, 1e-9);
}

TEST(Softmax, ErrorCases) {
  Tensor<double> t = Tensor<double>::zeros({1, 1, 2, 2});
  t.values()[0] = std::numeric_limits<double>::infinity();
  EXPECT_THROW(ravnet::softmax_axis(t, 0), ravnet::DomainError);
  Tensor<double> ok = Tensor<double>::zeros({1, 1, 2, 2});
  EXPECT_THROW(ravnet::softmax_axis(ok, 2), ravnet::ConfigError);
  EXPECT_THROW(ravnet::softmax_axis(Tensor<double>::zeros({1, 2, 2, 2}), 0), ravnet::ShapeError);
}

TEST(Rng, SplitMix64IsReproducible) {
  SplitMix64 a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  SplitMix64 c(43);
  EXPECT_NE(a.next_u64(), c.next_u64());
}

TEST(Rng, UniformStaysInRange) {
  SplitMix64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.uniform(-2.0, 5.0);
    EXPECT_GE(v, -2.0);
    EXPECT_LT(v, 5.0);
  }
}
