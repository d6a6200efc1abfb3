#include "msent/tabular.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "msent/error.hpp"

namespace msent {

namespace {

void require_same_space(const ProductSpace& a, const ProductSpace& b, const char* what) {
  if (!(a == b)) {
    throw Error(Errc::SpaceMismatch, what);
  }
}

// Normalizes log-weights (-inf marks an excluded state) into a distribution.
std::vector<double> normalize_log_weights(std::vector<double> log_w, Errc on_empty,
                                          const char* what) {
  double top = -std::numeric_limits<double>::infinity();
  for (double v : log_w) top = std::max(top, v);
  if (!std::isfinite(top)) {
    throw Error(on_empty, what);
  }
  double total = 0.0;
  for (double& v : log_w) {
    v = std::isfinite(v) ? std::exp(v - top) : 0.0;
    total += v;
  }
  for (double& v : log_w) v /= total;
  return log_w;
}

}  // namespace

// ---------------------------------------------------------------------------
// ProductSpace

ProductSpace::ProductSpace(std::vector<std::size_t> axis_sizes, std::size_t max_size)
    : axes_(std::move(axis_sizes)), size_(1) {
  if (axes_.empty()) {
    throw Error(Errc::InvalidArgument, "product space needs at least one axis");
  }
  for (std::size_t n : axes_) {
    if (n == 0) {
      throw Error(Errc::InvalidArgument, "axis sizes must be positive");
    }
    if (size_ > max_size / n) {
      throw Error(Errc::SpaceTooLarge,
                  "product space exceeds the cap of " + std::to_string(max_size) + " states");
    }
    size_ *= n;
  }
}

std::size_t ProductSpace::index(std::span<const std::size_t> coords) const {
  if (coords.size() != axes_.size()) {
    throw Error(Errc::DimensionMismatch, "coordinate count does not match rank");
  }
  std::size_t idx = 0;
  for (std::size_t k = 0; k < axes_.size(); ++k) {
    if (coords[k] >= axes_[k]) {
      throw Error(Errc::InvalidArgument, "coordinate out of range");
    }
    idx = idx * axes_[k] + coords[k];
  }
  return idx;
}

std::vector<std::size_t> ProductSpace::coords(std::size_t index) const {
  std::vector<std::size_t> out(axes_.size());
  for (std::size_t k = axes_.size(); k-- > 0;) {
    out[k] = index % axes_[k];
    index /= axes_[k];
  }
  return out;
}

ProductSpace ProductSpace::leading(std::size_t count) const {
  if (count == 0 || count > axes_.size()) {
    throw Error(Errc::InvalidArgument, "leading axis count out of range");
  }
  return ProductSpace(std::vector<std::size_t>(axes_.begin(), axes_.begin() + count));
}

// ---------------------------------------------------------------------------
// TabularDist / EnergyTable

TabularDist::TabularDist(ProductSpace space, std::vector<double> probs)
    : space_(std::move(space)), probs_(std::move(probs)) {
  if (probs_.size() != space_.size()) {
    throw Error(Errc::DimensionMismatch, "probability table length does not match the space");
  }
  double total = 0.0;
  for (double v : probs_) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(Errc::InvalidDistribution, "probabilities must be finite and nonnegative");
    }
    total += v;
  }
  if (std::abs(total - 1.0) > Tolerances::normalization) {
    throw Error(Errc::InvalidDistribution,
                "probabilities sum to " + std::to_string(total) + ", expected 1");
  }
}

TabularDist TabularDist::uniform(const ProductSpace& space) {
  return from_weights(space, std::vector<double>(space.size(), 1.0));
}

TabularDist TabularDist::point_mass(const ProductSpace& space, std::size_t index) {
  if (index >= space.size()) {
    throw Error(Errc::InvalidArgument, "point mass index out of range");
  }
  std::vector<double> probs(space.size(), 0.0);
  probs[index] = 1.0;
  return TabularDist(space, std::move(probs));
}

TabularDist TabularDist::from_weights(ProductSpace space, std::vector<double> weights) {
  if (weights.size() != space.size()) {
    throw Error(Errc::DimensionMismatch, "weight table length does not match the space");
  }
  double total = 0.0;
  for (double v : weights) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(Errc::InvalidDistribution, "weights must be finite and nonnegative");
    }
    total += v;
  }
  if (!(total > 0.0)) {
    throw Error(Errc::InvalidDistribution, "weights sum to zero");
  }
  for (double& v : weights) v /= total;
  // Kahan-free renormalization can drift by a few ulps per entry; fold the
  // residual into the largest entry so the sum check is exact enough.
  const double drift = 1.0 - std::accumulate(weights.begin(), weights.end(), 0.0);
  if (drift != 0.0) {
    auto it = std::max_element(weights.begin(), weights.end());
    *it = std::max(0.0, *it + drift);
  }
  return TabularDist(std::move(space), std::move(weights));
}

EnergyTable::EnergyTable(ProductSpace space, std::vector<double> values)
    : space_(std::move(space)), values_(std::move(values)) {
  if (values_.size() != space_.size()) {
    throw Error(Errc::DimensionMismatch, "energy table length does not match the space");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) {
      throw Error(Errc::InvalidArgument, "energy values must be finite");
    }
  }
}

// ---------------------------------------------------------------------------
// ScaleMap

ScaleMap::ScaleMap(ProductSpace source, ProductSpace target, std::vector<std::size_t> map)
    : source_(std::move(source)), target_(std::move(target)), map_(std::move(map)) {
  if (map_.size() != source_.size()) {
    throw Error(Errc::DimensionMismatch, "scale map length does not match its source space");
  }
  for (std::size_t j : map_) {
    if (j >= target_.size()) {
      throw Error(Errc::InvalidArgument, "scale map entry outside the target space");
    }
  }
}

ScaleMap ScaleMap::identity(const ProductSpace& space) {
  std::vector<std::size_t> map(space.size());
  std::iota(map.begin(), map.end(), std::size_t{0});
  return ScaleMap(space, space, std::move(map));
}

ScaleMap ScaleMap::decimation(const ProductSpace& space) {
  if (space.rank() < 2) {
    throw Error(Errc::InvalidArgument, "decimation needs at least two axes");
  }
  const std::size_t last = space.axis_sizes().back();
  ProductSpace target = space.leading(space.rank() - 1);
  std::vector<std::size_t> map(space.size());
  for (std::size_t i = 0; i < map.size(); ++i) map[i] = i / last;
  return ScaleMap(space, std::move(target), std::move(map));
}

std::vector<ScaleMap> decimation_chain(const ProductSpace& space, std::size_t levels) {
  if (levels == 0 || levels > space.rank()) {
    throw Error(Errc::InvalidArgument, "decimation chain needs 1 <= levels <= rank");
  }
  std::vector<ScaleMap> chain;
  ProductSpace current = space;
  for (std::size_t k = 1; k < levels; ++k) {
    chain.push_back(ScaleMap::decimation(current));
    current = chain.back().target();
  }
  return chain;
}

void validate_chain(const ProductSpace& space, std::span<const ScaleMap> chain,
                    std::size_t levels) {
  if (chain.size() + 1 != levels) {
    throw Error(Errc::DimensionMismatch,
                "chain has " + std::to_string(chain.size()) + " maps but the schedule has " +
                    std::to_string(levels) + " scales");
  }
  const ProductSpace* current = &space;
  for (const ScaleMap& t : chain) {
    require_same_space(t.source(), *current, "scale map source does not match the previous scale");
    current = &t.target();
  }
}

// ---------------------------------------------------------------------------
// ConditionalTable

ConditionalTable::ConditionalTable(ScaleMap map, std::vector<double> weights,
                                   std::vector<bool> defined)
    : map_(std::move(map)), weights_(std::move(weights)), defined_(std::move(defined)) {
  if (weights_.size() != map_.source().size() || defined_.size() != map_.target().size()) {
    throw Error(Errc::DimensionMismatch, "conditional table dimensions");
  }
}

std::optional<TabularDist> ConditionalTable::row(std::size_t given) const {
  if (!defined(given)) return std::nullopt;
  std::vector<double> probs(output_space().size(), 0.0);
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (map_(i) == given) probs[i] = weights_[i];
  }
  return TabularDist::from_weights(output_space(), std::move(probs));
}

// ---------------------------------------------------------------------------
// Entropies and divergences

double shannon_entropy(const TabularDist& p) {
  double h = 0.0;
  for (double v : p.probs()) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return std::max(0.0, h);
}

double kl(const TabularDist& p, const TabularDist& q) {
  require_same_space(p.space(), q.space(), "kl: distributions live on different spaces");
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pi = p[i];
    if (pi <= 0.0) continue;
    const double qi = q[i];
    if (qi <= 0.0) {
      throw Error(Errc::AbsoluteContinuityViolation,
                  "p has mass at state " + std::to_string(i) + " where q vanishes");
    }
    d += pi * (std::log(pi) - std::log(qi));
  }
  return std::max(0.0, d);
}

double renyi_entropy(const TabularDist& p, double order) {
  if (!(order > 0.0) || order == 1.0 || !std::isfinite(order)) {
    throw Error(Errc::InvalidOrder, "Renyi entropy order must lie in (0,1) or (1,inf)");
  }
  double s = 0.0;
  for (double v : p.probs()) {
    if (v > 0.0) s += std::pow(v, order);
  }
  return std::log(s) / (1.0 - order);
}

double renyi_divergence(const TabularDist& q, const TabularDist& r, double order) {
  if (!(order > 0.0 && order < 1.0)) {
    throw Error(Errc::InvalidOrder, "Renyi divergence order must lie in (0,1)");
  }
  require_same_space(q.space(), r.space(), "renyi_divergence: distributions live on different spaces");
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] > 0.0 && r[i] > 0.0) {
      s += std::exp(order * std::log(q[i]) + (1.0 - order) * std::log(r[i]));
    }
  }
  if (s <= 0.0) return std::numeric_limits<double>::infinity();
  return std::max(0.0, std::log(s) / (order - 1.0));
}

double total_variation(const TabularDist& p, const TabularDist& q) {
  require_same_space(p.space(), q.space(), "total_variation: distributions live on different spaces");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

double expectation(const TabularDist& p, const EnergyTable& f) {
  require_same_space(p.space(), f.space(), "expectation: energy lives on a different space");
  double e = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) e += p[i] * f[i];
  return e;
}

// ---------------------------------------------------------------------------
// Scaled, tilted and Gibbs distributions

TabularDist scale(const TabularDist& p, double theta) {
  if (!(theta > 0.0) || !std::isfinite(theta)) {
    throw Error(Errc::NonpositiveTheta, "scale exponent must be positive");
  }
  if (theta == 1.0) return p;
  std::vector<double> log_w(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    log_w[i] = p[i] > 0.0 ? theta * std::log(p[i]) : -std::numeric_limits<double>::infinity();
  }
  return TabularDist::from_weights(
      p.space(), normalize_log_weights(std::move(log_w), Errc::InvalidDistribution, "empty support"));
}

TabularDist tilt(const TabularDist& p, const TabularDist& q, double theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) {
    throw Error(Errc::InvalidArgument, "tilt index must lie in [0,1]");
  }
  require_same_space(p.space(), q.space(), "tilt: distributions live on different spaces");
  if (theta == 1.0) return p;
  if (theta == 0.0) return q;
  std::vector<double> log_w(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    log_w[i] = (p[i] > 0.0 && q[i] > 0.0)
                   ? theta * std::log(p[i]) + (1.0 - theta) * std::log(q[i])
                   : -std::numeric_limits<double>::infinity();
  }
  return TabularDist::from_weights(
      p.space(), normalize_log_weights(std::move(log_w), Errc::EmptyGeometricMean,
                                       "supports of the tilted pair do not intersect"));
}

TabularDist gibbs(const EnergyTable& f, const TabularDist& q, double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw Error(Errc::InvalidArgument, "inverse temperature must be positive and finite");
  }
  require_same_space(f.space(), q.space(), "gibbs: energy and reference live on different spaces");
  std::vector<double> log_w(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    log_w[i] = q[i] > 0.0 ? std::log(q[i]) - beta * f[i]
                          : -std::numeric_limits<double>::infinity();
  }
  return TabularDist::from_weights(
      q.space(), normalize_log_weights(std::move(log_w), Errc::VanishingPartitionFunction,
                                       "Gibbs weights vanish everywhere"));
}

// ---------------------------------------------------------------------------
// Coarse-graining and refinement

TabularDist pushforward(const TabularDist& p, const ScaleMap& t) {
  require_same_space(p.space(), t.source(), "pushforward: map source does not match the distribution");
  std::vector<double> out(t.target().size(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) out[t(i)] += p[i];
  return TabularDist::from_weights(t.target(), std::move(out));
}

ConditionalTable reverse_conditional(const TabularDist& p, const ScaleMap& t) {
  require_same_space(p.space(), t.source(),
                     "reverse_conditional: map source does not match the distribution");
  std::vector<double> mass(t.target().size(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) mass[t(i)] += p[i];
  std::vector<double> weights(p.size(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = mass[t(i)];
    if (m > 0.0) weights[i] = p[i] / m;
  }
  std::vector<bool> defined(mass.size());
  for (std::size_t j = 0; j < mass.size(); ++j) defined[j] = mass[j] > 0.0;
  return ConditionalTable(t, std::move(weights), std::move(defined));
}

TabularDist compose(const TabularDist& coarse, const ConditionalTable& conditional) {
  require_same_space(coarse.space(), conditional.given_space(),
                     "refine: coarse marginal does not live on the conditional's given space");
  for (std::size_t j = 0; j < coarse.size(); ++j) {
    if (coarse[j] > 0.0 && !conditional.defined(j)) {
      throw Error(Errc::UndefinedConditionalRow,
                  "coarse state " + std::to_string(j) + " has mass but no conditional row");
    }
  }
  const ScaleMap& t = conditional.scale_map();
  std::vector<double> out(t.source().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = coarse[t(i)] * conditional.weight(i);
  return TabularDist::from_weights(t.source(), std::move(out));
}

TabularDist refine(const TabularDist& coarsest, std::span<const ConditionalTable> conditionals) {
  TabularDist current = coarsest;
  for (std::size_t k = conditionals.size(); k-- > 0;) {
    current = compose(current, conditionals[k]);
  }
  return current;
}

std::vector<TabularDist> scale_marginals(const TabularDist& p, std::span<const ScaleMap> chain) {
  std::vector<TabularDist> out;
  out.reserve(chain.size() + 1);
  out.push_back(p);
  for (const ScaleMap& t : chain) out.push_back(pushforward(out.back(), t));
  return out;
}

double multiscale_relative_entropy(const TabularDist& p, const TabularDist& q,
                                   const TemperatureSchedule& sched,
                                   std::span<const ScaleMap> chain) {
  validate_chain(p.space(), chain, sched.levels());
  const auto ps = scale_marginals(p, chain);
  const auto qs = scale_marginals(q, chain);
  double total = 0.0;
  for (std::size_t i = 1; i <= sched.levels(); ++i) {
    if (sched.sigma(i) == 0.0) continue;
    total += sched.sigma(i) * kl(ps[i - 1], qs[i - 1]);
  }
  return total;
}

double multiscale_shannon_entropy(const TabularDist& p, const TemperatureSchedule& sched,
                                  std::span<const ScaleMap> chain) {
  validate_chain(p.space(), chain, sched.levels());
  const auto ps = scale_marginals(p, chain);
  double total = 0.0;
  for (std::size_t i = 1; i <= sched.levels(); ++i) {
    if (sched.sigma(i) == 0.0) continue;
    total += sched.sigma(i) * shannon_entropy(ps[i - 1]);
  }
  return total;
}

}  // namespace msent
