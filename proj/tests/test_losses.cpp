#include <cmath>

#include <gtest/gtest.h>

#include "ravnet/gradcheck.hpp"
#include "ravnet/losses.hpp"
#include "ravnet/ops.hpp"
#include "ravnet/rng.hpp"
#include "ravnet/tape.hpp"
#include "ravnet/tensor.hpp"

namespace {

using ravnet::Dims;
using ravnet::SplitMix64;
using ravnet::Tensor;

TEST(DiceLoss, PerfectMatchAllOnesIsExactlyZero) {
  auto ones = Tensor<double>::ones({1, 1, 4, 4});
  EXPECT_EQ(ravnet::dice_loss(ones, ones).item(), 0.0);
}

TEST(DiceLoss, EmptyMasksScorePerfectViaSmoothing) {
  auto zeros = Tensor<double>::zeros({1, 1, 4, 4});
  // Smoothing makes the empty/empty ratio 1/1, so the loss is exactly 0.
  EXPECT_EQ(ravnet::dice_loss(zeros, zeros).item(), 0.0);
}

TEST(DiceLoss, TotalMissOn2x2IsFourFifths) {
  auto pred = Tensor<double>::ones({1, 1, 2, 2});
  auto truth = Tensor<double>::zeros({1, 1, 2, 2});
  double loss = ravnet::dice_loss(pred, truth).item();
  // Overlap 0, |pred| 4: ratio (0+1)/(4+0+1), loss 1 - 1/5.
  EXPECT_EQ(loss, 1.0 - 1.0 / 5.0);
  EXPECT_DOUBLE_EQ(loss, 0.8);
}

TEST(DiceLoss, LossAndSoftDiceSumToOne) {
  SplitMix64 rng(3);
  auto pred = Tensor<double>::rand_uniform({2, 1, 8, 8}, rng, 0.05, 0.95);
  auto truth = Tensor<double>::zeros({2, 1, 8, 8});
  for (std::size_t i = 0; i < truth.size(); ++i)
    truth.values()[i] = rng.next_double() < 0.5 ? 0.0 : 1.0;
  double d = ravnet::soft_dice(pred, truth).item();
  double l = ravnet::dice_loss(pred, truth).item();
  EXPECT_NEAR(d + l, 1.0, 1e-12);
  EXPECT_GE(l, 0.0);
  EXPECT_LT(l, 1.0);
}

TEST(DiceLoss, DimMismatchThrows) {
  auto a = Tensor<double>::ones({1, 1, 4, 4});
  auto b = Tensor<double>::ones({1, 1, 4, 5});
  EXPECT_THROW(ravnet::dice_loss(a, b), ravnet::ShapeError);
}

TEST(BceLoss, HalfConfidenceOnPositivesIsLogTwo) {
  auto pred = Tensor<double>::full({1, 1, 4, 4}, 0.5);
  auto truth = Tensor<double>::ones({1, 1, 4, 4});
  EXPECT_NEAR(ravnet::bce_loss(pred, truth).item(), std::log(2.0), 1e-6);
}

TEST(BceLoss, ConfidentCorrectPredictionIsNearZero) {
  auto pred = Tensor<double>::full({1, 1, 4, 4}, 1.0 - 1e-7);
  auto truth = Tensor<double>::ones({1, 1, 4, 4});
  EXPECT_LE(ravnet::bce_loss(pred, truth).item(), 1e-6);
}

TEST(BceLoss, ClampKeepsEndpointInputsFinite) {
  auto pred = Tensor<double>::zeros({1, 1, 2, 2});
  pred.values()[0] = 1.0;
  auto truth = Tensor<double>::ones({1, 1, 2, 2});
  double loss = ravnet::bce_loss(pred, truth).item();
  EXPECT_TRUE(std::isfinite(loss));
  EXPECT_GT(loss, 0.0);
}

TEST(BceLoss, GradientAtHalfIsMinusTwo) {
  ravnet::Tape<double> tape;
  auto pred = Tensor<double>::full({1, 1, 1, 1}, 0.5);
  pred.set_requires_grad(true);
  auto truth = Tensor<double>::ones({1, 1, 1, 1});
  auto loss = ravnet::bce_loss(pred, truth);
  tape.backward(loss);
  // Single pixel, y = 1: d/dp of -log(p) at p = 0.5 is -1/p = -2.
  EXPECT_NEAR(pred.grad()[0], -2.0, 1e-9);
}

TEST(BceLoss, DimMismatchThrows) {
  auto a = Tensor<double>::ones({1, 1, 4, 4});
  auto b = Tensor<double>::ones({2, 1, 4, 4});
  EXPECT_THROW(ravnet::bce_loss(a, b), ravnet::ShapeError);
}

TEST(LossGradients, DiceMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SplitMix64 rng(100 + seed);
    auto pred = Tensor<double>::rand_uniform({1, 1, 6, 6}, rng, 0.2, 0.8);
    auto truth = Tensor<double>::zeros({1, 1, 6, 6});
    for (std::size_t i = 0; i < truth.size(); ++i)
      truth.values()[i] = rng.next_double() < 0.5 ? 0.0 : 1.0;
    auto report = ravnet::grad_check(
        [&] { return ravnet::dice_loss(pred, truth); }, {{"pred", pred}});
    EXPECT_TRUE(report.pass) << report.str();
  }
}

TEST(LossGradients, BceMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SplitMix64 rng(200 + seed);
    auto pred = Tensor<double>::rand_uniform({1, 1, 6, 6}, rng, 0.2, 0.8);
    auto truth = Tensor<double>::zeros({1, 1, 6, 6});
    for (std::size_t i = 0; i < truth.size(); ++i)
      truth.values()[i] = rng.next_double() < 0.5 ? 0.0 : 1.0;
    auto report = ravnet::grad_check(
        [&] { return ravnet::bce_loss(pred, truth); }, {{"pred", pred}});
    EXPECT_TRUE(report.pass) << report.str();
  }
}

TEST(LossGradients, BceGradientAtSinglePixelMatchesHandValue) {
  auto pred = Tensor<double>::full({1, 1, 1, 1}, 0.5);
  auto truth = Tensor<double>::ones({1, 1, 1, 1});
  auto report = ravnet::grad_check(
      [&] { return ravnet::bce_loss(pred, truth); }, {{"pred", pred}}, 1e-4, 1e-5);
  EXPECT_TRUE(report.pass) << report.str();
}

}  // namespace
