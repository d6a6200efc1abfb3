#pragma once

// Hand-rolled generators for property tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "msent/gaussian.hpp"
#include "msent/schedule.hpp"
#include "msent/tabular.hpp"

namespace msent::testing {

inline std::mt19937_64 rng_for(std::uint64_t seed) { return std::mt19937_64(seed); }

/// Strictly positive random distribution (Dirichlet(1)-like, floored away from 0).
inline TabularDist random_dist(const ProductSpace& space, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> w(space.size());
  for (double& x : w) x = u(rng);
  return TabularDist::from_weights(space, std::move(w));
}

inline EnergyTable random_energy(const ProductSpace& space, std::mt19937_64& rng,
                                 double spread = 2.0) {
  std::uniform_real_distribution<double> u(-spread, spread);
  std::vector<double> v(space.size());
  for (double& x : v) x = u(rng);
  return EnergyTable(space, std::move(v));
}

/// Random surjective map from `source` onto a one-axis space of `target_size` states.
inline ScaleMap random_surjection(const ProductSpace& source, std::size_t target_size,
                                  std::mt19937_64& rng) {
  std::vector<std::size_t> map(source.size());
  std::vector<std::size_t> order(source.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::uniform_int_distribution<std::size_t> pick(0, target_size - 1);
  for (std::size_t k = 0; k < order.size(); ++k) {
    map[order[k]] = k < target_size ? k : pick(rng);
  }
  return ScaleMap(source, ProductSpace({target_size}), std::move(map));
}

inline Matrix random_pd(Index n, std::mt19937_64& rng, double ridge = 0.5) {
  std::normal_distribution<double> z;
  Matrix a(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) a(i, j) = z(rng);
  }
  return a * a.transpose() / static_cast<double>(n) + ridge * Matrix::Identity(n, n);
}

inline Vector random_vector(Index n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> z(0.0, scale);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = z(rng);
  return v;
}

inline GaussianDist random_gaussian(Index n, std::mt19937_64& rng) {
  return GaussianDist::from_covariance(random_vector(n, rng), random_pd(n, rng));
}

inline double rel_frobenius(const Matrix& a, const Matrix& b) {
  return (a - b).norm() / std::max(1e-300, b.norm());
}

/// A small tabular problem for oracle comparisons.
struct TabularInstance {
  ProductSpace space;
  EnergyTable f;
  TabularDist q;
  TemperatureSchedule sched;
  std::vector<ScaleMap> chain;
  bool decimation;
};

/// Spaces up to 3x3x3. Even `index` uses a decimation chain, odd a chain of
/// random surjections.
inline TabularInstance random_instance(std::size_t index, std::mt19937_64& rng) {
  static const std::vector<std::vector<std::size_t>> shapes = {
      {2, 2}, {2, 2, 2}, {3, 3}, {2, 3, 2}, {3, 3, 3}};
  const ProductSpace space(shapes[index / 2 % shapes.size()]);
  const bool decimation = index % 2 == 0;
  const std::size_t levels = decimation ? space.rank() : 2 + index / 2 % 2;

  std::vector<ScaleMap> chain;
  if (decimation) {
    chain = decimation_chain(space, levels);
  } else {
    ProductSpace current = space;
    std::size_t target = space.size();
    for (std::size_t k = 1; k < levels; ++k) {
      target = std::max<std::size_t>(2, target / 3);
      chain.push_back(random_surjection(current, target, rng));
      current = chain.back().target();
    }
  }

  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> sigma(levels);
  sigma[0] = 0.5 + 1.5 * u(rng);
  for (std::size_t k = 1; k < levels; ++k) sigma[k] = 2.0 * u(rng);
  const double lambda = 0.5 + 1.5 * u(rng);

  EnergyTable f = random_energy(space, rng);
  TabularDist q = random_dist(space, rng);
  return {space, std::move(f), std::move(q), TemperatureSchedule(lambda, std::move(sigma)),
          std::move(chain), decimation};
}

/// p * exp(eps * z) renormalized, z standard normal per state.
inline TabularDist perturb(const TabularDist& p, double eps, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  std::vector<double> w(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) w[i] = p[i] * std::exp(eps * z(rng));
  return TabularDist::from_weights(p.space(), std::move(w));
}

}  // namespace msent::testing
