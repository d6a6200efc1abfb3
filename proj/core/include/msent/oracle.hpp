#pragma once

// Brute-force reference solvers, independent of the renormalization algorithms.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "msent/gaussian.hpp"
#include "msent/schedule.hpp"
#include "msent/tabular.hpp"

namespace msent {

struct OracleSettings {
  std::size_t max_iterations = 50'000;
  /// Mirror-descent step, in units of the inverse total curvature.
  double step_size = 0.1;
  /// Stationarity gap, measured on the curvature-normalized gradient.
  double convergence_tol = 1e-11;
  std::size_t grid_points = 2001;
  double grid_radius_sigmas = 6.0;
  std::size_t max_states = 4096;
};

enum class Objective {
  MinRelativeEntropy,  // E[f] + lambda * D_sigma(P || Q)
  MaxEntropy,          // H_sigma(P) - lambda * E[f], maximized
};

struct OracleResult {
  TabularDist distribution;
  /// Value of the minimized objective (the negated one for MaxEntropy).
  double objective;
  std::size_t iterations;
  double stationarity_gap;
};

/// Exponentiated-gradient descent on the simplex. `q` is required for
/// MinRelativeEntropy and ignored for MaxEntropy.
OracleResult minimize_tabular(Objective objective, const EnergyTable& f,
                              const std::optional<TabularDist>& q, const TemperatureSchedule& sched,
                              std::span<const ScaleMap> chain, const OracleSettings& settings = {});

/// The quantity minimize_tabular minimizes, evaluated at p.
double objective_value(Objective objective, const TabularDist& p, const EnergyTable& f,
                       const std::optional<TabularDist>& q, const TemperatureSchedule& sched,
                       std::span<const ScaleMap> chain);

struct QuadratureMoments {
  Vector mean;
  Matrix covariance;
  double log_normalizer;
};

using LogDensityFn = std::function<double(const Vector&)>;

/// Trapezoid-rule moments of an unnormalized density on the box
/// center +- radius (1-D or 2-D) with settings.grid_points nodes per axis.
/// Throws MassLeakage when a boundary node carries more than 1e-10 of the mass.
QuadratureMoments quadrature_density_moments(const LogDensityFn& log_density, const Vector& center,
                                             const Vector& radius,
                                             const OracleSettings& settings = {});

/// Density sampled at the nodes of a regular grid, as a table over the grid.
struct GridDiscretization {
  std::vector<std::vector<double>> axes;
  TabularDist distribution;
};

GridDiscretization discretize_density(const LogDensityFn& log_density, const Vector& center,
                                      const Vector& radius, std::size_t points_per_axis);

/// Mean and covariance of a table whose states are the nodes of `axes`.
std::pair<Vector, Matrix> grid_moments(const TabularDist& p,
                                       std::span<const std::vector<double>> axes);

}  // namespace msent
