#include "msent/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "msent/constants.hpp"
#include "msent/error.hpp"
#include "msent/multiscale.hpp"

namespace msent {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void log_normalize(std::vector<double>& log_p) {
  double top = kNegInf;
  for (double v : log_p) top = std::max(top, v);
  double total = 0.0;
  for (double v : log_p) total += std::isfinite(v) ? std::exp(v - top) : 0.0;
  const double shift = top + std::log(total);
  for (double& v : log_p) {
    if (std::isfinite(v)) v -= shift;
  }
}

// Log of the pushforward of exp(log_p) along `map` into `size` cells.
void log_pushforward(std::span<const double> log_p, std::span<const std::size_t> map,
                     std::vector<double>& top, std::vector<double>& out) {
  std::fill(top.begin(), top.end(), kNegInf);
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t w = 0; w < log_p.size(); ++w) top[map[w]] = std::max(top[map[w]], log_p[w]);
  for (std::size_t w = 0; w < log_p.size(); ++w) {
    if (std::isfinite(log_p[w])) out[map[w]] += std::exp(log_p[w] - top[map[w]]);
  }
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = out[j] > 0.0 ? top[j] + std::log(out[j]) : kNegInf;
  }
}

}  // namespace

double objective_value(Objective objective, const TabularDist& p, const EnergyTable& f,
                       const std::optional<TabularDist>& q, const TemperatureSchedule& sched,
                       std::span<const ScaleMap> chain) {
  if (objective == Objective::MaxEntropy) return max_entropy_objective(p, f, sched, chain);
  if (!q) throw Error(Errc::InvalidArgument, "relative-entropy objective needs a reference");
  return relative_entropy_objective(p, f, *q, sched, chain);
}

OracleResult minimize_tabular(Objective objective, const EnergyTable& f,
                              const std::optional<TabularDist>& q, const TemperatureSchedule& sched,
                              std::span<const ScaleMap> chain, const OracleSettings& settings) {
  const ProductSpace& space = f.space();
  const std::size_t n = space.size();
  if (n > settings.max_states) {
    throw Error(Errc::SpaceTooLarge, "oracle is limited to " + std::to_string(settings.max_states) +
                                         " states, got " + std::to_string(n));
  }
  if (!(settings.step_size > 0.0) || !(settings.convergence_tol > 0.0)) {
    throw Error(Errc::InvalidArgument, "oracle step and tolerance must be positive");
  }
  validate_chain(space, chain, sched.levels());
  const bool relative = objective == Objective::MinRelativeEntropy;
  if (relative) {
    if (!q) throw Error(Errc::InvalidArgument, "relative-entropy objective needs a reference");
    if (!(q->space() == space)) throw Error(Errc::SpaceMismatch, "reference space differs");
  }

  const std::size_t d = sched.levels();
  // maps[k][w]: index at scale k+1 of finest state w
  std::vector<std::vector<std::size_t>> maps(d);
  std::vector<std::size_t> sizes(d);
  maps[0].resize(n);
  for (std::size_t w = 0; w < n; ++w) maps[0][w] = w;
  sizes[0] = n;
  for (std::size_t k = 1; k < d; ++k) {
    maps[k].resize(n);
    for (std::size_t w = 0; w < n; ++w) maps[k][w] = chain[k - 1](maps[k - 1][w]);
    sizes[k] = chain[k - 1].target().size();
  }

  std::vector<double> coef(d);
  std::vector<double> linear(n);
  for (std::size_t k = 0; k < d; ++k) {
    coef[k] = relative ? sched.lambda() * sched.sigma(k + 1) : sched.sigma(k + 1);
  }
  for (std::size_t w = 0; w < n; ++w) linear[w] = relative ? f[w] : sched.lambda() * f[w];
  double curvature = 0.0;
  for (double c : coef) curvature += c;

  std::vector<double> log_p(n);
  std::vector<std::vector<double>> log_q(d);
  if (relative) {
    for (std::size_t w = 0; w < n; ++w) log_p[w] = (*q)[w] > 0.0 ? std::log((*q)[w]) : kNegInf;
  } else {
    std::fill(log_p.begin(), log_p.end(), -std::log(static_cast<double>(n)));
  }
  std::vector<std::vector<double>> tops(d), log_marg(d);
  for (std::size_t k = 0; k < d; ++k) {
    tops[k].resize(sizes[k]);
    log_marg[k].resize(sizes[k]);
    log_q[k].assign(sizes[k], 0.0);
    if (relative) log_pushforward(log_p, maps[k], tops[k], log_q[k]);
  }

  std::vector<double> grad(n);
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it <= settings.max_iterations; ++it) {
    for (std::size_t k = 0; k < d; ++k) {
      if (coef[k] != 0.0) log_pushforward(log_p, maps[k], tops[k], log_marg[k]);
    }
    double mean = 0.0;
    for (std::size_t w = 0; w < n; ++w) {
      if (!std::isfinite(log_p[w])) continue;
      double g = linear[w];
      for (std::size_t k = 0; k < d; ++k) {
        if (coef[k] == 0.0) continue;
        const std::size_t j = maps[k][w];
        g += coef[k] * (log_marg[k][j] - log_q[k][j]);
      }
      grad[w] = g / curvature;
      mean += std::exp(log_p[w]) * grad[w];
    }
    gap = 0.0;
    for (std::size_t w = 0; w < n; ++w) {
      if (std::isfinite(log_p[w])) gap = std::max(gap, std::abs(grad[w] - mean));
    }
    if (gap <= settings.convergence_tol) {
      std::vector<double> probs(n);
      for (std::size_t w = 0; w < n; ++w) probs[w] = std::isfinite(log_p[w]) ? std::exp(log_p[w]) : 0.0;
      TabularDist p = TabularDist::from_weights(space, std::move(probs));
      const double value = objective_value(objective, p, f, q, sched, chain);
      return {std::move(p), value, it, gap};
    }
    if (it == settings.max_iterations) break;
    for (std::size_t w = 0; w < n; ++w) {
      if (std::isfinite(log_p[w])) log_p[w] -= settings.step_size * grad[w];
    }
    log_normalize(log_p);
  }
  throw Error(Errc::NonConvergence, "mirror descent stopped at gap " + std::to_string(gap) +
                                        " after " + std::to_string(settings.max_iterations) +
                                        " iterations");
}

// ---------------------------------------------------------------------------
// Grids

namespace {

struct Grid {
  std::vector<std::vector<double>> axes;
  std::size_t total = 1;
};

Grid make_grid(const Vector& center, const Vector& radius, std::size_t points) {
  if (center.size() != radius.size() || center.size() < 1 || center.size() > 2) {
    throw Error(Errc::DimensionMismatch, "quadrature supports one or two dimensions");
  }
  if (points < 3) throw Error(Errc::InvalidArgument, "grid needs at least three points per axis");
  Grid grid;
  for (Index a = 0; a < center.size(); ++a) {
    if (!(radius[a] > 0.0)) throw Error(Errc::InvalidArgument, "grid radius must be positive");
    std::vector<double> axis(points);
    for (std::size_t k = 0; k < points; ++k) {
      axis[k] = center[a] - radius[a] + 2.0 * radius[a] * static_cast<double>(k) /
                                            static_cast<double>(points - 1);
    }
    grid.axes.push_back(std::move(axis));
    grid.total *= points;
  }
  return grid;
}

// Node coordinates of flat index i (last axis fastest).
Vector node(const Grid& grid, std::size_t i) {
  const std::size_t dim = grid.axes.size();
  Vector x(static_cast<Index>(dim));
  for (std::size_t a = dim; a-- > 0;) {
    const std::size_t len = grid.axes[a].size();
    x[static_cast<Index>(a)] = grid.axes[a][i % len];
    i /= len;
  }
  return x;
}

bool on_boundary(const Grid& grid, std::size_t i) {
  for (std::size_t a = grid.axes.size(); a-- > 0;) {
    const std::size_t len = grid.axes[a].size();
    const std::size_t k = i % len;
    if (k == 0 || k + 1 == len) return true;
    i /= len;
  }
  return false;
}

double trapezoid_weight(const Grid& grid, std::size_t i) {
  double w = 1.0;
  for (std::size_t a = grid.axes.size(); a-- > 0;) {
    const std::size_t len = grid.axes[a].size();
    const std::size_t k = i % len;
    if (k == 0 || k + 1 == len) w *= 0.5;
    i /= len;
  }
  return w;
}

std::vector<double> evaluate(const LogDensityFn& log_density, const Grid& grid, double& top) {
  std::vector<double> values(grid.total);
  top = kNegInf;
  for (std::size_t i = 0; i < grid.total; ++i) {
    values[i] = log_density(node(grid, i));
    if (std::isnan(values[i])) throw Error(Errc::InvalidArgument, "log density returned NaN");
    top = std::max(top, values[i]);
  }
  if (!std::isfinite(top)) throw Error(Errc::VanishingPartitionFunction, "density vanishes on the grid");
  return values;
}

}  // namespace

QuadratureMoments quadrature_density_moments(const LogDensityFn& log_density, const Vector& center,
                                             const Vector& radius, const OracleSettings& settings) {
  const Grid grid = make_grid(center, radius, settings.grid_points);
  double top = 0.0;
  const std::vector<double> log_values = evaluate(log_density, grid, top);
  const Index dim = center.size();

  double cell = 1.0;
  for (const auto& axis : grid.axes) cell *= axis[1] - axis[0];

  double mass = 0.0;
  double boundary = 0.0;
  Vector first = Vector::Zero(dim);
  Matrix second = Matrix::Zero(dim, dim);
  for (std::size_t i = 0; i < grid.total; ++i) {
    const double w = std::exp(log_values[i] - top) * trapezoid_weight(grid, i);
    if (on_boundary(grid, i)) boundary = std::max(boundary, w);
    const Vector x = node(grid, i);
    mass += w;
    first += w * x;
    second += w * x * x.transpose();
  }
  // Largest share of the total mass carried by a single boundary node.
  if (boundary / mass > Tolerances::mass_leakage) {
    throw Error(Errc::MassLeakage, "a boundary node carries " + std::to_string(boundary / mass) +
                                       " of the mass");
  }
  QuadratureMoments out;
  out.mean = first / mass;
  out.covariance = second / mass - out.mean * out.mean.transpose();
  out.log_normalizer = top + std::log(mass * cell);
  return out;
}

GridDiscretization discretize_density(const LogDensityFn& log_density, const Vector& center,
                                      const Vector& radius, std::size_t points_per_axis) {
  Grid grid = make_grid(center, radius, points_per_axis);
  double top = 0.0;
  std::vector<double> weights = evaluate(log_density, grid, top);
  for (double& v : weights) v = std::exp(v - top);
  std::vector<std::size_t> sizes(grid.axes.size(), points_per_axis);
  ProductSpace space(std::move(sizes));
  return {std::move(grid.axes), TabularDist::from_weights(std::move(space), std::move(weights))};
}

std::pair<Vector, Matrix> grid_moments(const TabularDist& p,
                                       std::span<const std::vector<double>> axes) {
  const auto sizes = p.space().axis_sizes();
  if (sizes.size() != axes.size()) throw Error(Errc::DimensionMismatch, "grid rank differs");
  for (std::size_t a = 0; a < axes.size(); ++a) {
    if (sizes[a] != axes[a].size()) throw Error(Errc::DimensionMismatch, "grid axis length differs");
  }
  Grid grid{{axes.begin(), axes.end()}, p.size()};
  const Index dim = static_cast<Index>(axes.size());
  Vector mean = Vector::Zero(dim);
  Matrix second = Matrix::Zero(dim, dim);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    const Vector x = node(grid, i);
    mean += p[i] * x;
    second += p[i] * x * x.transpose();
  }
  return {mean, second - mean * mean.transpose()};
}

}  // namespace msent
