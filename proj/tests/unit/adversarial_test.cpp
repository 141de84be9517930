#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "tenconv/adversarial.hpp"
#include "tenconv/error.hpp"
#include "tenconv/ops.hpp"
#include "tenconv/training.hpp"

using namespace tenconv;

namespace {

LabeledImageSet images(std::size_t per_class, std::uint64_t seed) {
  SyntheticConfig cfg;
  cfg.classes = 3;
  cfg.per_class = per_class;
  cfg.seed = seed;
  cfg.sigma = 0.2;
  return make_synthetic(cfg);
}

double mean_loss(Model& m, const Tensor& x, const std::vector<int>& labels) {
  ad::Tape tape;
  ForwardContext ctx(tape, false);
  return ad::softmax_cross_entropy(m.forward(ctx, tape.input(x)), labels).value().item();
}

}  // namespace

TEST(Fgsm, ZeroEpsilonIsIdentity) {
  Model m(make_micro_tcnn(), 1);
  const LabeledImageSet set = images(4, 2);
  EXPECT_TRUE(identical(fgsm(m, set.images, set.labels, 0.0), set.images));
}

TEST(Fgsm, PerturbationWithinBudgetAndRange) {
  Model m(make_micro_tcnn(), 3);
  const LabeledImageSet set = images(10, 4);
  for (double eps : {0.01, 0.05, 0.1, 0.3, 1.0 / 3.0}) {
    const Tensor adv = fgsm(m, set.images, set.labels, eps);
    for (std::size_t i = 0; i < adv.numel(); ++i) {
      ASSERT_LE(std::abs(adv[i] - set.images[i]), eps) << eps;
      ASSERT_GE(adv[i], 0.0);
      ASSERT_LE(adv[i], 1.0);
    }
  }
}

TEST(Fgsm, SignStepStructure) {
  // Away from the clip bounds every pixel moves by exactly +-eps in the
  // direction of the input gradient.
  Tensor x = Tensor::full(Shape{2, 1, 2, 2}, 0.5);
  Tensor g(Shape{2, 1, 2, 2}, {1.0, -2.0, 0.0, 1e-30, -1e-30, 3.0, 0.0, -1.0});
  const Tensor adv = fgsm_step(x, g, 0.25);
  const double expected[] = {0.75, 0.25, 0.5, 0.75, 0.25, 0.75, 0.5, 0.25};
  for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(adv[i], expected[i]);
  // Clipping at the range limits.
  Tensor edge(Shape{2}, {0.95, 0.02});
  const Tensor clipped = fgsm_step(edge, Tensor(Shape{2}, {1.0, -1.0}), 0.1);
  EXPECT_EQ(clipped[0], 1.0);
  EXPECT_EQ(clipped[1], 0.0);
  EXPECT_THROW(fgsm_step(edge, Tensor(Shape{3}), 0.1), ShapeMismatch);
}

TEST(Fgsm, InputGradientMatchesFiniteDifferences) {
  Model m(make_micro_tcnn(), 5);
  const LabeledImageSet set = images(2, 6);
  const Tensor g = input_gradient(m, set.images, set.labels);
  ASSERT_EQ(g.shape(), set.images.shape());
  Tensor x = set.images;
  double worst = 0;
  for (std::size_t i = 0; i < x.numel(); i += 7) {
    const Real v = x[i];
    x[i] = v + 1e-6;
    const double plus = mean_loss(m, x, set.labels);
    x[i] = v - 1e-6;
    const double minus = mean_loss(m, x, set.labels);
    x[i] = v;
    const double numeric = (plus - minus) / 2e-6;
    worst = std::max(worst, std::abs(numeric - g[i]) / std::max({std::abs(numeric), std::abs(double(g[i])), 1e-6}));
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(Fgsm, FirstOrderLossIncrease) {
  // A small signed step raises the loss by about eps * ||g||_1.
  Model m(make_micro_tcnn(), 7);
  const LabeledImageSet set = images(4, 8);
  const Tensor g = input_gradient(m, set.images, set.labels);
  double l1 = 0;
  for (Real v : g.data()) l1 += std::abs(v);
  const double eps = 1e-5;
  const double gain = mean_loss(m, fgsm_step(set.images, g, eps), set.labels) - mean_loss(m, set.images, set.labels);
  EXPECT_GT(gain, 0);
  EXPECT_NEAR(gain, eps * l1, 0.05 * eps * l1);
}

TEST(Sweep, ZeroEpsilonEqualsCleanAccuracy) {
  Model m(make_micro_tcnn(), 9);
  const LabeledImageSet set = images(20, 10);
  AttackConfig cfg;
  cfg.batch_size = 16;
  const RobustnessCurve c = sweep(m, set, cfg);
  ASSERT_EQ(c.accuracies.size(), cfg.epsilons.size());
  EXPECT_EQ(c.accuracies[0], evaluate(m, set).accuracy);
  EXPECT_EQ(c.model, c.source);
  EXPECT_EQ(c.parameters, m.parameter_count());
}

TEST(Sweep, TrainedModelDegradesWithEpsilon) {
  SyntheticConfig data;
  data.classes = 2;
  data.per_class = 300;
  data.height = data.width = 7;
  data.seed = 11;
  const LabeledImageSet set = make_synthetic(data);
  Model m(make_micro_tcnn(7, 2), 12);
  TrainConfig tc;
  tc.batch_size = 32;
  tc.max_epochs = 8;
  tc.learning_rate = 3e-3;
  train(m, set, set, tc);
  AttackConfig cfg;
  cfg.epsilons = {0.0, 0.02, 0.1, 0.3};
  const RobustnessCurve c = sweep(m, set, cfg);
  EXPECT_GT(c.accuracies[0], 0.8);
  EXPECT_LT(c.accuracies[3], c.accuracies[0] - 0.3);
  for (std::size_t i = 1; i < c.accuracies.size(); ++i) EXPECT_LE(c.accuracies[i], c.accuracies[0]);
}

TEST(Transfer, SelfTransferEqualsSweepAndIsDeterministic) {
  Model a(make_micro_tcnn(), 13), b(make_micro_tcnn(), 14);
  const LabeledImageSet set = images(20, 15);
  AttackConfig cfg;
  cfg.batch_size = 7;
  const RobustnessCurve s = sweep(a, set, cfg);
  EXPECT_EQ(transfer_attack(a, a, set, cfg).accuracies, s.accuracies);
  cfg.threads = 3;
  EXPECT_EQ(sweep(a, set, cfg).accuracies, s.accuracies);
  const RobustnessCurve t = transfer_attack(a, b, set, cfg);
  EXPECT_EQ(t.source, "micro-tcnn0");
  EXPECT_EQ(t.accuracies[0], evaluate(b, set).accuracy);
  EXPECT_EQ(transfer_attack(a, b, set, cfg).accuracies, t.accuracies);
}

TEST(Transfer, Errors) {
  Model a(make_micro_tcnn(8, 3), 1), b(make_micro_tcnn(8, 2), 1);
  const LabeledImageSet set = images(2, 16);
  AttackConfig cfg;
  EXPECT_THROW(transfer_attack(a, b, set, cfg), ClassCountMismatch);
  EXPECT_THROW(sweep(a, head(set, 0), cfg), DataEmpty);
  cfg.epsilons = {0.1, 0.05};
  EXPECT_THROW(sweep(a, set, cfg), ConfigError);
  cfg.epsilons = {};
  EXPECT_THROW(sweep(a, set, cfg), ConfigError);
}

TEST(Curve, CsvAndJson) {
  RobustnessCurve c;
  c.model = "m";
  c.source = "s";
  c.parameters = 3;
  c.epsilons = {0.0, 0.1};
  c.accuracies = {1.0, 0.5};
  EXPECT_EQ(curve_csv(c), "epsilon,accuracy\n0,1\n0.1,0.5\n");
  const std::string j = curve_json(c);
  EXPECT_NE(j.find("\"source\": \"s\""), std::string::npos);
  EXPECT_NE(j.find("\"parameters\": 3"), std::string::npos);
}
