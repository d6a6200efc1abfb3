#include <gtest/gtest.h>

#include <cmath>

#include "msent/error.hpp"
#include "msent/tabular.hpp"
#include "support.hpp"

namespace msent {
namespace {

using testing::random_dist;
using testing::random_energy;
using testing::rng_for;

const ProductSpace kBinary({2});

TabularDist dist(std::vector<std::size_t> axes, std::vector<double> p) {
  return TabularDist(ProductSpace(std::move(axes)), std::move(p));
}

void expect_probs(const TabularDist& p, const std::vector<double>& want, double tol = 1e-12) {
  ASSERT_EQ(p.size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(p[i], want[i], tol) << "entry " << i;
}

Errc code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return Errc::InvalidArgument;
}

TEST(ProductSpace, RejectsEmptyAxisAndOversize) {
  EXPECT_EQ(code_of([] { ProductSpace({2, 0}); }), Errc::InvalidArgument);
  EXPECT_EQ(code_of([] { ProductSpace({1000, 1000, 2}); }), Errc::SpaceTooLarge);
  EXPECT_EQ(ProductSpace({3, 4}).size(), 12u);
}

TEST(ProductSpace, IndexRoundTrip) {
  const ProductSpace s({2, 3, 4});
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(s.index(s.coords(i)), i);
  EXPECT_EQ(s.index(std::vector<std::size_t>{1, 0, 0}), 12u);
}

TEST(TabularDist, ValidatesMass) {
  EXPECT_EQ(code_of([] { dist({2}, {0.5, 0.4}); }), Errc::InvalidDistribution);
  EXPECT_EQ(code_of([] { dist({2}, {1.5, -0.5}); }), Errc::InvalidDistribution);
}

TEST(ShannonEntropy, Examples) {
  EXPECT_NEAR(shannon_entropy(TabularDist::uniform(ProductSpace({4}))), std::log(4.0), 1e-15);
  EXPECT_EQ(shannon_entropy(TabularDist::point_mass(ProductSpace({5}), 2)), 0.0);
  EXPECT_NEAR(shannon_entropy(dist({2}, {0.8, 0.2})), -0.8 * std::log(0.8) - 0.2 * std::log(0.2),
              1e-15);
}

TEST(Kl, Examples) {
  const TabularDist p = dist({2}, {0.3, 0.7});
  EXPECT_EQ(kl(p, p), 0.0);
  EXPECT_NEAR(kl(dist({2}, {1.0, 0.0}), dist({2}, {0.5, 0.5})), std::log(2.0), 1e-15);
  EXPECT_EQ(code_of([] { kl(dist({2}, {0.5, 0.5}), dist({2}, {1.0, 0.0})); }),
            Errc::AbsoluteContinuityViolation);
}

TEST(RenyiEntropy, Examples) {
  const TabularDist u = TabularDist::uniform(ProductSpace({5}));
  for (double a : {0.3, 2.0, 7.0}) EXPECT_NEAR(renyi_entropy(u, a), std::log(5.0), 1e-14);
  EXPECT_NEAR(renyi_entropy(TabularDist::point_mass(ProductSpace({3}), 1), 2.0), 0.0, 1e-15);
  EXPECT_NEAR(renyi_entropy(dist({2}, {0.8, 0.2}), 2.0), -std::log(0.68), 1e-14);
  for (double a : {0.0, 1.0, -1.0}) {
    EXPECT_EQ(code_of([&] { renyi_entropy(u, a); }), Errc::InvalidOrder);
  }
}

TEST(RenyiDivergence, Examples) {
  const TabularDist q = dist({2}, {0.25, 0.75});
  EXPECT_NEAR(renyi_divergence(q, q, 0.4), 0.0, 1e-15);
  EXPECT_NEAR(renyi_divergence(dist({2}, {1.0, 0.0}), dist({2}, {0.5, 0.5}), 0.5), std::log(2.0),
              1e-15);
  EXPECT_EQ(code_of([&] { renyi_divergence(q, q, 1.0); }), Errc::InvalidOrder);
  EXPECT_EQ(code_of([&] { renyi_divergence(q, q, 1.5); }), Errc::InvalidOrder);
}

TEST(Scale, Examples) {
  const TabularDist p = dist({2}, {0.8, 0.2});
  expect_probs(scale(p, 1.0), {0.8, 0.2});
  expect_probs(scale(p, 0.5), {2.0 / 3.0, 1.0 / 3.0});
  const TabularDist u = TabularDist::uniform(ProductSpace({3}));
  expect_probs(scale(u, 3.7), {1.0 / 3, 1.0 / 3, 1.0 / 3});
  EXPECT_EQ(code_of([&] { scale(p, 0.0); }), Errc::NonpositiveTheta);
}

TEST(Tilt, Examples) {
  const TabularDist p = dist({2}, {0.9, 0.1});
  const TabularDist q = dist({2}, {0.1, 0.9});
  expect_probs(tilt(p, q, 1.0), {0.9, 0.1}, 0.0);
  expect_probs(tilt(p, q, 0.0), {0.1, 0.9}, 0.0);
  expect_probs(tilt(p, p, 0.3), {0.9, 0.1});
  expect_probs(tilt(p, q, 0.5), {0.5, 0.5});
  EXPECT_EQ(code_of([] { tilt(dist({2}, {1.0, 0.0}), dist({2}, {0.0, 1.0}), 0.5); }),
            Errc::EmptyGeometricMean);
}

TEST(Tilt, SupportIsIntersection) {
  const TabularDist p = dist({3}, {0.5, 0.5, 0.0});
  const TabularDist q = dist({3}, {0.0, 0.5, 0.5});
  expect_probs(tilt(p, q, 0.3), {0.0, 1.0, 0.0});
}

TEST(Gibbs, Examples) {
  const TabularDist q = dist({3}, {0.2, 0.3, 0.5});
  expect_probs(gibbs(EnergyTable(ProductSpace({3}), {4.0, 4.0, 4.0}), q, 2.0), {0.2, 0.3, 0.5});
  expect_probs(gibbs(EnergyTable(kBinary, {0.0, std::log(2.0)}), TabularDist::uniform(kBinary), 1.0),
               {2.0 / 3.0, 1.0 / 3.0});
  const EnergyTable f(ProductSpace({3}), {1.0, -3.0, 2.0});
  EXPECT_LE(total_variation(gibbs(f, q, 1e-8), q), 1e-6);
  EXPECT_EQ(code_of([&] { gibbs(f, q, 0.0); }), Errc::InvalidArgument);
}

TEST(Gibbs, SupportFollowsReference) {
  const TabularDist q = dist({3}, {0.0, 0.4, 0.6});
  const TabularDist g = gibbs(EnergyTable(ProductSpace({3}), {-50.0, 0.0, 1.0}), q, 1.0);
  EXPECT_EQ(g[0], 0.0);
}

TEST(Pushforward, Examples) {
  auto rng = rng_for(3);
  const ProductSpace s({2, 3});
  const TabularDist p = random_dist(s, rng);
  expect_probs(pushforward(p, ScaleMap::identity(s)),
               std::vector<double>(p.probs().begin(), p.probs().end()));

  const TabularDist a = dist({2}, {0.3, 0.7});
  const TabularDist b = dist({3}, {0.2, 0.5, 0.3});
  std::vector<double> prod;
  for (double x : a.probs())
    for (double y : b.probs()) prod.push_back(x * y);
  expect_probs(pushforward(TabularDist(s, prod), ScaleMap::decimation(s)), {0.3, 0.7});

  const ScaleMap pairs(ProductSpace({4}), ProductSpace({2}), {0, 0, 1, 1});
  expect_probs(pushforward(dist({4}, {0.1, 0.2, 0.3, 0.4}), pairs), {0.3, 0.7});
}

TEST(ReverseConditional, Examples) {
  const ScaleMap id = ScaleMap::identity(ProductSpace({3}));
  const auto c = reverse_conditional(dist({3}, {0.2, 0.0, 0.8}), id);
  EXPECT_FALSE(c.defined(1));
  expect_probs(*c.row(0), {1.0, 0.0, 0.0});
  expect_probs(*c.row(2), {0.0, 0.0, 1.0});

  const ScaleMap pairs(ProductSpace({4}), ProductSpace({2}), {0, 0, 1, 1});
  const auto u = reverse_conditional(TabularDist::uniform(ProductSpace({4})), pairs);
  expect_probs(*u.row(0), {0.5, 0.5, 0.0, 0.0});
  expect_probs(*u.row(1), {0.0, 0.0, 0.5, 0.5});

  const auto r = reverse_conditional(dist({4}, {0.1, 0.3, 0.6, 0.0}), pairs);
  expect_probs(*r.row(0), {0.25, 0.75, 0.0, 0.0});
  expect_probs(*r.row(1), {0.0, 0.0, 1.0, 0.0});
}

TEST(Refine, Examples) {
  const TabularDist p = dist({3}, {0.2, 0.3, 0.5});
  expect_probs(refine(p, {}), {0.2, 0.3, 0.5}, 0.0);

  auto rng = rng_for(11);
  const ProductSpace s({2, 2, 2});
  const TabularDist q = random_dist(s, rng);
  const auto chain = decimation_chain(s, 3);
  std::vector<ConditionalTable> conds;
  TabularDist cur = q;
  for (const ScaleMap& t : chain) {
    conds.push_back(reverse_conditional(cur, t));
    cur = pushforward(cur, t);
  }
  expect_probs(refine(cur, conds), std::vector<double>(q.probs().begin(), q.probs().end()));
}

TEST(Refine, UndefinedRowWithMassThrows) {
  const ScaleMap pairs(ProductSpace({4}), ProductSpace({2}), {0, 0, 1, 1});
  const auto c = reverse_conditional(dist({4}, {0.5, 0.5, 0.0, 0.0}), pairs);
  std::vector<ConditionalTable> conds{c};
  EXPECT_EQ(code_of([&] { refine(dist({2}, {0.5, 0.5}), conds); }), Errc::UndefinedConditionalRow);
  expect_probs(refine(dist({2}, {1.0, 0.0}), conds), {0.5, 0.5, 0.0, 0.0});
}

TEST(MultiscaleMeasures, Examples) {
  auto rng = rng_for(5);
  const ProductSpace s({2, 2});
  const auto chain = decimation_chain(s, 2);
  const TabularDist p = random_dist(s, rng);
  const TabularDist q = random_dist(s, rng);
  const TemperatureSchedule single(1.0, {1.0, 0.0});
  EXPECT_NEAR(multiscale_relative_entropy(p, q, single, chain), kl(p, q), 1e-15);
  EXPECT_NEAR(multiscale_relative_entropy(p, p, TemperatureSchedule(1.0, {1.0, 1.0}), chain), 0.0,
              1e-15);
  const double two = multiscale_relative_entropy(p, q, TemperatureSchedule(1.0, {1.0, 1.0}), chain);
  EXPECT_NEAR(two, kl(p, q) + kl(pushforward(p, chain[0]), pushforward(q, chain[0])), 1e-14);

  EXPECT_NEAR(multiscale_shannon_entropy(p, single, chain), shannon_entropy(p), 1e-15);
  const TabularDist u = TabularDist::uniform(s);
  EXPECT_NEAR(multiscale_shannon_entropy(u, TemperatureSchedule(1.0, {1.0, 2.0}), chain),
              std::log(4.0) + 2.0 * std::log(2.0), 1e-14);
  EXPECT_NEAR(multiscale_shannon_entropy(p, TemperatureSchedule(1.0, {0.5, 3.0}), chain),
              0.5 * shannon_entropy(p) + 3.0 * shannon_entropy(pushforward(p, chain[0])), 1e-14);
}

// ---------------------------------------------------------------------------
// Decomposition identities

TEST(Identities, ChainRule) {
  auto rng = rng_for(101);
  for (int trial = 0; trial < 100; ++trial) {
    const ProductSpace s({3, 4});
    const TabularDist p = random_dist(s, rng);
    const TabularDist q = random_dist(s, rng);
    const ScaleMap t = testing::random_surjection(s, 1 + trial % 5, rng);
    const TabularDist pt = pushforward(p, t);
    const auto cp = reverse_conditional(p, t);
    const auto cq = reverse_conditional(q, t);
    double rhs = kl(pt, pushforward(q, t));
    for (std::size_t j = 0; j < pt.size(); ++j) rhs += pt[j] * kl(*cp.row(j), *cq.row(j));
    EXPECT_NEAR(kl(p, q), rhs, 1e-10);
  }
}

TEST(Identities, EntropyKlMixing) {
  auto rng = rng_for(102);
  std::uniform_real_distribution<double> th(1e-3, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const ProductSpace s({6});
    const TabularDist p = random_dist(s, rng);
    const TabularDist q = random_dist(s, rng);
    const double theta = th(rng);
    const double a = theta / (1.0 + theta);
    const double lhs = shannon_entropy(p) - theta * kl(p, q);
    const double rhs = renyi_entropy(q, a) - (1.0 + theta) * kl(p, scale(q, a));
    EXPECT_NEAR(lhs, rhs, 1e-10);
  }
}

TEST(Identities, RenyiTilt) {
  auto rng = rng_for(103);
  std::uniform_real_distribution<double> th(1e-3, 1.0 - 1e-3);
  for (int trial = 0; trial < 100; ++trial) {
    const ProductSpace s({2, 3});
    const TabularDist p = random_dist(s, rng);
    const TabularDist q = random_dist(s, rng);
    const TabularDist r = random_dist(s, rng);
    const double theta = th(rng);
    const double lhs = theta * kl(p, q) + (1.0 - theta) * kl(p, r);
    const double rhs = kl(p, tilt(q, r, theta)) + (1.0 - theta) * renyi_divergence(q, r, theta);
    EXPECT_NEAR(lhs, rhs, 1e-10);
  }
}

TEST(Identities, GibbsOptimality) {
  auto rng = rng_for(104);
  const ProductSpace s({3, 3});
  const EnergyTable f = random_energy(s, rng);
  const TabularDist q = random_dist(s, rng);
  const double lambda = 0.7;
  const TabularDist g = gibbs(f, q, 1.0 / lambda);
  const double best = expectation(g, f) + lambda * kl(g, q);
  for (int trial = 0; trial < 100; ++trial) {
    const TabularDist p = random_dist(s, rng);
    EXPECT_GE(expectation(p, f) + lambda * kl(p, q), best);
  }
}

TEST(Identities, MassPreservation) {
  auto rng = rng_for(105);
  const ProductSpace s({3, 3, 3});
  for (int trial = 0; trial < 20; ++trial) {
    const TabularDist p = random_dist(s, rng);
    const ScaleMap t = testing::random_surjection(s, 4, rng);
    const TabularDist coarse = pushforward(p, t);
    double total = 0.0;
    for (double v : coarse.probs()) total += v;
    EXPECT_NEAR(total, 1.0, 1e-12);
    const TabularDist back = compose(coarse, reverse_conditional(p, t));
    EXPECT_LE(total_variation(back, p), 1e-12);
  }
}

}  // namespace
}  // namespace msent
