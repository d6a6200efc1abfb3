#pragma once

// Renormalization-style solvers for maximum multiscale entropy and minimum
// multiscale relative entropy.
//
// Each solver runs three phases:
//   1. start from the microscopic Gibbs distribution U(1);
//   2. for i = 2..d coarse-grain U(i-1) and renormalize it with the tilting
//      index tau_i, either by scaling (entropy) or by tilting toward the
//      reference marginal (relative entropy), giving U(i);
//   3. refine from U(d) back to the finest scale by concatenating the reverse
//      conditionals of U(d-1), ..., U(1).
//
// The algorithm bodies are written once against a backend that supplies the
// distribution algebra.

#include <concepts>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "msent/error.hpp"
#include "msent/gaussian.hpp"
#include "msent/schedule.hpp"
#include "msent/tabular.hpp"

namespace msent {

// clang-format off
template <class B>
concept RenormalizationBackend = requires(const B& b, const typename B::Dist& p, double theta,
                                          std::size_t scale) {
  typename B::Dist;
  { b.levels() } -> std::convertible_to<std::size_t>;
  // law of W^(scale+1) from the law of W^(scale)
  { b.coarse_grain(p, scale) } -> std::same_as<typename B::Dist>;
  { b.scale(p, theta) } -> std::same_as<typename B::Dist>;
  { b.tilt(p, p, theta) } -> std::same_as<typename B::Dist>;
  // law at `scale` with marginal `coarse` at scale+1 and the conditionals of `fine`
  { b.refine(p, p, scale) } -> std::same_as<typename B::Dist>;
};
// clang-format on

template <class Dist>
struct MultiscaleSolution {
  Dist distribution;
  /// intermediates[k] is U(k+1), the renormalized law at scale k+1.
  std::vector<Dist> intermediates;
};

namespace detail {

template <RenormalizationBackend B, class Renormalize>
MultiscaleSolution<typename B::Dist> renormalize_and_refine(const B& backend,
                                                            typename B::Dist gibbs_dist,
                                                            const TemperatureSchedule& sched,
                                                            Renormalize&& renormalize) {
  using Dist = typename B::Dist;
  const std::size_t d = sched.levels();
  if (backend.levels() != d) {
    throw Error(Errc::DimensionMismatch, "backend scale count differs from the schedule");
  }
  std::vector<Dist> u;
  u.reserve(d);
  u.push_back(std::move(gibbs_dist));
  for (std::size_t i = 2; i <= d; ++i) {
    Dist coarse = backend.coarse_grain(u.back(), i - 1);
    u.push_back(renormalize(std::move(coarse), i, sched.tilting_index(i)));
  }

  // `exact` records that `current` is literally U(level), which lets a scale
  // whose tilting index is 1 pass U(level-1) through without a round trip.
  Dist current = u.back();
  bool exact = true;
  for (std::size_t level = d - 1; level >= 1; --level) {
    if (exact && sched.tilting_index(level + 1) == 1.0) {
      current = u[level - 1];
    } else {
      current = backend.refine(current, u[level - 1], level);
      exact = false;
    }
  }
  return {std::move(current), std::move(u)};
}

}  // namespace detail

/// Maximizer of sum_i sigma_i H(W^(i)) - lambda E[f], given its single-scale Gibbs law.
template <RenormalizationBackend B>
MultiscaleSolution<typename B::Dist> renormalize_max_entropy(const B& backend,
                                                             typename B::Dist gibbs_dist,
                                                             const TemperatureSchedule& sched) {
  return detail::renormalize_and_refine(
      backend, std::move(gibbs_dist), sched,
      [&backend](typename B::Dist m, std::size_t, double tau) { return backend.scale(m, tau); });
}

/// Minimizer of E[f] + lambda sum_i sigma_i D(P_(i) || Q_(i)), given its
/// single-scale Gibbs law and the reference Q at the finest scale.
template <RenormalizationBackend B>
MultiscaleSolution<typename B::Dist> renormalize_relative_entropy(const B& backend,
                                                                  typename B::Dist gibbs_dist,
                                                                  const typename B::Dist& reference,
                                                                  const TemperatureSchedule& sched) {
  using Dist = typename B::Dist;
  std::vector<Dist> refs;
  refs.reserve(sched.levels());
  refs.push_back(reference);
  for (std::size_t i = 2; i <= sched.levels(); ++i) {
    refs.push_back(backend.coarse_grain(refs.back(), i - 1));
  }
  return detail::renormalize_and_refine(
      backend, std::move(gibbs_dist), sched,
      [&backend, &refs](Dist m, std::size_t i, double tau) {
        return backend.tilt(m, refs[i - 1], tau);
      });
}

// ---------------------------------------------------------------------------
// Backends

/// Tabular distributions coarse-grained through an arbitrary chain of ScaleMaps.
class TabularChainBackend {
 public:
  using Dist = TabularDist;

  TabularChainBackend(ProductSpace space, std::vector<ScaleMap> chain);

  std::size_t levels() const noexcept { return chain_.size() + 1; }
  std::span<const ScaleMap> chain() const noexcept { return chain_; }

  TabularDist coarse_grain(const TabularDist& p, std::size_t scale) const;
  TabularDist scale(const TabularDist& p, double theta) const { return msent::scale(p, theta); }
  TabularDist tilt(const TabularDist& p, const TabularDist& q, double theta) const {
    return msent::tilt(p, q, theta);
  }
  TabularDist refine(const TabularDist& coarse, const TabularDist& fine, std::size_t scale) const;

 private:
  ProductSpace space_;
  std::vector<ScaleMap> chain_;
};

/// Tabular distributions under decimation: each coarse-graining sums out the
/// last remaining axis. Works on the axis layout directly, without ScaleMaps.
class TabularDecimationBackend {
 public:
  using Dist = TabularDist;

  TabularDecimationBackend(ProductSpace space, std::size_t levels);

  std::size_t levels() const noexcept { return levels_; }

  TabularDist coarse_grain(const TabularDist& p, std::size_t scale) const;
  TabularDist scale(const TabularDist& p, double theta) const { return msent::scale(p, theta); }
  TabularDist tilt(const TabularDist& p, const TabularDist& q, double theta) const {
    return msent::tilt(p, q, theta);
  }
  TabularDist refine(const TabularDist& coarse, const TabularDist& fine, std::size_t scale) const;

 private:
  ProductSpace space_;
  std::size_t levels_;
};

/// Gaussian distributions under block decimation (the deepest block goes first).
class GaussianDecimationBackend {
 public:
  using Dist = GaussianDist;

  explicit GaussianDecimationBackend(BlockPartition partition);

  std::size_t levels() const noexcept { return partition_.count(); }
  const BlockPartition& partition() const noexcept { return partition_; }
  /// Dimension of W^(scale) = (W_1, ..., W_{d-scale+1}).
  Index scale_dim(std::size_t scale) const;

  GaussianDist coarse_grain(const GaussianDist& p, std::size_t scale) const;
  GaussianDist scale(const GaussianDist& p, double theta) const { return msent::scale(p, theta); }
  GaussianDist tilt(const GaussianDist& p, const GaussianDist& q, double theta) const {
    return msent::tilt(p, q, theta);
  }
  GaussianDist refine(const GaussianDist& coarse, const GaussianDist& fine, std::size_t scale) const;

 private:
  BlockPartition partition_;
};

static_assert(RenormalizationBackend<TabularChainBackend>);
static_assert(RenormalizationBackend<TabularDecimationBackend>);
static_assert(RenormalizationBackend<GaussianDecimationBackend>);

// ---------------------------------------------------------------------------
// Entry points

/// Tabular maximum multiscale Shannon entropy over an arbitrary chain.
MultiscaleSolution<TabularDist> solve_max_entropy(const EnergyTable& f,
                                                  const TemperatureSchedule& sched,
                                                  std::span<const ScaleMap> chain);

/// Tabular minimum multiscale relative entropy over an arbitrary chain.
MultiscaleSolution<TabularDist> solve_min_relative_entropy(const EnergyTable& f,
                                                           const TabularDist& q,
                                                           const TemperatureSchedule& sched,
                                                           std::span<const ScaleMap> chain);

/// Marginalize-tilt on a tabular product space; scales drop trailing axes.
MultiscaleSolution<TabularDist> solve_mt(const TabularDist& gibbs_dist, const TabularDist& q,
                                         const TemperatureSchedule& sched);

/// Differential-entropy maximizer for a quadratic energy under block decimation.
MultiscaleSolution<GaussianDist> solve_max_entropy(const QuadraticEnergy& f,
                                                   const TemperatureSchedule& sched,
                                                   const BlockPartition& partition);

MultiscaleSolution<GaussianDist> solve_min_relative_entropy(const QuadraticEnergy& f,
                                                            const GaussianDist& q,
                                                            const TemperatureSchedule& sched,
                                                            const BlockPartition& partition);

/// Marginalize-tilt on Gaussians under block decimation.
MultiscaleSolution<GaussianDist> solve_mt(const GaussianDist& gibbs_dist, const GaussianDist& q,
                                          const TemperatureSchedule& sched,
                                          const BlockPartition& partition);

/// Largest relative Frobenius discrepancy between the output and what
/// refinement promises: its coarsest marginal is U(d), and at every finer
/// scale it carries U(i)'s conditional given scale i+1.
double refinement_error(const MultiscaleSolution<GaussianDist>& solution,
                        const BlockPartition& partition);

/// E[f] + lambda * D_sigma(p || q), the relative-entropy objective.
double relative_entropy_objective(const TabularDist& p, const EnergyTable& f, const TabularDist& q,
                                  const TemperatureSchedule& sched, std::span<const ScaleMap> chain);
/// lambda * E[f] - H_sigma(p), the negated max-entropy objective (to be minimized).
double max_entropy_objective(const TabularDist& p, const EnergyTable& f,
                             const TemperatureSchedule& sched, std::span<const ScaleMap> chain);

}  // namespace msent
