#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "msent/bounds.hpp"
#include "msent/error.hpp"
#include "support.hpp"

namespace msent::bounds {
namespace {

using msent::testing::random_gaussian;
using msent::testing::random_pd;
using msent::testing::random_vector;
using msent::testing::rng_for;

constexpr double kE = std::numbers::e;

TEST(BoundConfig, ConstantAndValidation) {
  const BoundConfig cfg{2.0, 30, 4};
  EXPECT_DOUBLE_EQ(cfg.constant(), 2.0 * (2.0 * kE) * (2.0 * kE));
  EXPECT_THROW((BoundConfig{0.0, 30, 4}.validate()), Error);
  EXPECT_THROW((BoundConfig{1.0, 0, 4}.validate()), Error);
  EXPECT_THROW((BoundConfig{1.0, 30, 0}.validate()), Error);
}

TEST(GeneralizationBound, Examples) {
  const BoundConfig cfg{1.0, 25, 3};
  const std::vector<double> zeros(3, 0.0);
  const auto z = generalization_bound_value(zeros, cfg);
  EXPECT_EQ(z.value, 0.0);
  for (double g : z.gamma) EXPECT_EQ(g, std::numeric_limits<double>::infinity());

  const std::vector<double> ones(3, 1.0);
  EXPECT_NEAR(generalization_bound_value(ones, cfg).value, cfg.constant() / 5.0, 1e-14);

  const std::vector<double> bad = {1.0, -0.1, 2.0};
  try {
    generalization_bound_value(bad, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NegativeDivergenceInput);
  }
}

TEST(GeneralizationBound, MatchesGridSearchOverGamma) {
  auto rng = rng_for(501);
  std::uniform_real_distribution<double> u(0.01, 5.0);
  const BoundConfig cfg{1.3, 40, 4};
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> D(4);
    for (double& x : D) x = u(rng);
    const auto closed = generalization_bound_value(D, cfg);
    double grid = 0.0;
    for (std::size_t i = 0; i < D.size(); ++i) {
      // Golden-section search on the convex 1-D term.
      double lo = 1e-6, hi = 1e3;
      const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
      for (int it = 0; it < 200; ++it) {
        const double a = hi - phi * (hi - lo), b = lo + phi * (hi - lo);
        if (variational_term(a, D[i]) < variational_term(b, D[i])) hi = b; else lo = a;
      }
      grid += variational_term(0.5 * (lo + hi), D[i]);
      EXPECT_NEAR(variational_term(closed.gamma[i], D[i]), std::sqrt(D[i]), 1e-12);
    }
    grid *= cfg.constant() / (4.0 * std::sqrt(40.0));
    EXPECT_NEAR(closed.value, grid, 1e-6);
  }
}

TEST(Dpg, DiracIidPrior) {
  const double L = 0.7;
  const std::size_t d = 5;
  const DiracReference ref{std::vector<double>(d, L)};
  const BlockPartition part = BlockPartition::uniform(d, 2);
  const GaussianDist prior = GaussianDist::isotropic(10, 1.0);
  EXPECT_EQ(dpg(ref, prior, part, 1), 0.0);
  for (std::size_t i = 1; i <= d; ++i) {
    EXPECT_NEAR(dpg(ref, prior, part, i), std::sqrt(d * L) - std::sqrt((d - i + 1) * L), 1e-14);
  }
}

TEST(Dpg, GaussianIndependentBlocks) {
  auto rng = rng_for(502);
  const BlockPartition part({2, 1, 2});
  const GaussianDist prior = GaussianDist::isotropic(5, 0.5);
  Matrix S = Matrix::Zero(5, 5);
  std::vector<GaussianDist> blocks;
  Vector mean(5);
  for (std::size_t b = 0; b < part.count(); ++b) {
    const Index n = part.size(b);
    const Matrix Sb = random_pd(n, rng);
    const Vector mb = random_vector(n, rng);
    S.block(part.offset(b), part.offset(b), n, n) = Sb;
    mean.segment(part.offset(b), n) = mb;
    blocks.push_back(GaussianDist::from_covariance(mb, Sb));
  }
  const GaussianDist qhat = GaussianDist::from_covariance(mean, S);
  std::vector<double> per_block;
  for (std::size_t b = 0; b < part.count(); ++b) {
    per_block.push_back(kl(blocks[b], GaussianDist::isotropic(part.size(b), 0.5)));
  }
  const auto D = scale_divergences(qhat, prior, part);
  EXPECT_NEAR(D[0], per_block[0] + per_block[1] + per_block[2], 1e-10);
  EXPECT_NEAR(D[1], per_block[0] + per_block[1], 1e-10);
  EXPECT_NEAR(D[2], per_block[0], 1e-10);
  EXPECT_NEAR(dpg(qhat, prior, part, 3), std::sqrt(D[0]) - std::sqrt(per_block[0]), 1e-10);
}

TEST(ExcessRisk, Examples) {
  auto rng = rng_for(503);
  const BlockPartition part({2, 2});
  const GaussianDist prior = random_gaussian(4, rng);
  const BoundConfig cfg{1.0, 16, 2};
  EXPECT_NEAR(excess_risk_single(prior, prior, cfg, part), 0.0, 1e-6);

  const DiracReference ref{{0.4, 0.4}};
  EXPECT_NEAR(excess_risk_single(ref, prior, cfg, part), cfg.constant() / 4.0 * std::sqrt(0.8), 1e-14);

  const BoundConfig one{1.0, 16, 1};
  const GaussianDist q = random_gaussian(3, rng);
  const GaussianDist p = random_gaussian(3, rng);
  const BlockPartition whole({3});
  EXPECT_NEAR(excess_risk_single(q, p, one, whole), excess_risk_multiscale(q, p, one, whole), 1e-14);
}

TEST(ExcessRisk, DifferenceIsTheDpgSum) {
  auto rng = rng_for(504);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 2 + trial % 4;
    const BlockPartition part = BlockPartition::uniform(d, 1 + trial % 3);
    const Index n = part.total();
    const GaussianDist qhat = random_gaussian(n, rng);
    const GaussianDist prior = random_gaussian(n, rng);
    const BoundConfig cfg{1.0 + 0.1 * (trial % 5), static_cast<std::size_t>(10 + trial), d};
    const double single = excess_risk_single(qhat, prior, cfg, part);
    const double multi = excess_risk_multiscale(qhat, prior, cfg, part);
    double sum = 0.0;
    for (std::size_t i = 1; i <= d; ++i) {
      const double g = dpg(qhat, prior, part, i);
      EXPECT_GE(g, 0.0);
      sum += g;
    }
    const double expected = cfg.constant() / (double(d) * std::sqrt(double(cfg.n))) * sum;
    EXPECT_NEAR(single - multi, expected, 1e-10 * std::max(1.0, single));
    EXPECT_GE(single - multi, 0.0);
  }
}

TEST(TeacherStudent, DpgSumExamples) {
  const auto s = teacher_student_dpg_sum(4, 2.0, 1.0);
  EXPECT_NEAR(s.exact, 4.0 * std::sqrt(2.0) - (1.0 + std::sqrt(2.0)), 1e-14);
  EXPECT_NEAR(s.exact, 3.2426, 1e-4);
  EXPECT_NEAR(s.approx, 8.0 * (4.0 / 3.0) / (2.0 * std::sqrt(2.0)), 1e-14);
  EXPECT_NEAR(s.approx, 3.7712, 1e-4);
  const auto zero = teacher_student_dpg_sum(4, 2.0, 0.0);
  EXPECT_EQ(zero.exact, 0.0);
  EXPECT_EQ(zero.approx, 0.0);
  try {
    teacher_student_dpg_sum(5, 2.0, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NonIntegerTeacherDepth);
  }
}

TEST(TeacherStudent, ExactSumMatchesDiracDpg) {
  for (std::size_t d : {2u, 4u, 6u, 12u, 40u}) {
    for (double M : {2.0, double(d)}) {
      const auto tp = static_cast<std::size_t>(double(d) / M);
      const double L2 = 1.3;
      const DiracReference ref = teacher_student_reference(d, tp, 0.0, L2);
      const BlockPartition part = BlockPartition::uniform(d, 1);
      const GaussianDist prior = GaussianDist::isotropic(static_cast<Index>(d), 1.0);
      double sum = 0.0;
      for (std::size_t i = 1; i <= d; ++i) sum += dpg(ref, prior, part, i);
      EXPECT_NEAR(sum, teacher_student_dpg_sum(d, M, L2).exact, 1e-12 * double(d));
    }
  }
}

TEST(TeacherStudent, ApproximationGapShrinksWithDepth) {
  const auto at40 = teacher_student_dpg_sum(40, 2.0, 1.0);
  EXPECT_LT(std::abs(at40.approx - at40.exact) / at40.exact, 0.2);
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t d : {4u, 8u, 16u, 40u, 200u}) {
    const auto s = teacher_student_dpg_sum(d, 2.0, 1.0);
    const double gap = std::abs(s.approx - s.exact) / s.exact;
    EXPECT_LT(gap, previous);
    previous = gap;
  }
}

TEST(BoundReport, Fields) {
  auto rng = rng_for(505);
  const BlockPartition part({1, 1, 1});
  const GaussianDist prior = random_gaussian(3, rng);
  const auto j = bound_report(random_gaussian(3, rng), prior, BoundConfig{1.0, 30, 3}, part);
  ASSERT_TRUE(j.contains("scales"));
  EXPECT_EQ(j["scales"].size(), 3u);
  EXPECT_DOUBLE_EQ(j["scales"][0]["dpg"].get<double>(), 0.0);
  EXPECT_TRUE(j.contains("C_convention"));
  const double diff = j["excess_risk_single"].get<double>() - j["excess_risk_multiscale"].get<double>();
  EXPECT_NEAR(diff, j["difference_from_dpg"].get<double>(), 1e-12);
}

}  // namespace
}  // namespace msent::bounds
