#pragma once

// Exact probability computations on finite product alphabets.
//
// Joint states are addressed by a row-major index over the axes of a
// ProductSpace (the last axis varies fastest). All functions are pure.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "msent/constants.hpp"
#include "msent/schedule.hpp"

namespace msent {

class ProductSpace {
 public:
  explicit ProductSpace(std::vector<std::size_t> axis_sizes,
                        std::size_t max_size = Tolerances::max_space_size);

  std::span<const std::size_t> axis_sizes() const noexcept { return axes_; }
  std::size_t rank() const noexcept { return axes_.size(); }
  std::size_t size() const noexcept { return size_; }

  std::size_t index(std::span<const std::size_t> coords) const;
  std::vector<std::size_t> coords(std::size_t index) const;

  /// Space made of the first `count` axes.
  ProductSpace leading(std::size_t count) const;

  friend bool operator==(const ProductSpace& a, const ProductSpace& b) { return a.axes_ == b.axes_; }

 private:
  std::vector<std::size_t> axes_;
  std::size_t size_;
};

/// Probability table over a ProductSpace.
class TabularDist {
 public:
  /// Validates nonnegativity and unit mass (within Tolerances::normalization).
  TabularDist(ProductSpace space, std::vector<double> probs);

  static TabularDist uniform(const ProductSpace& space);
  static TabularDist point_mass(const ProductSpace& space, std::size_t index);
  /// Normalizes nonnegative weights; throws if they sum to zero.
  static TabularDist from_weights(ProductSpace space, std::vector<double> weights);

  const ProductSpace& space() const noexcept { return space_; }
  std::span<const double> probs() const noexcept { return probs_; }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::size_t size() const noexcept { return probs_.size(); }

 private:
  ProductSpace space_;
  std::vector<double> probs_;
};

/// Energy f(w) per joint state.
class EnergyTable {
 public:
  EnergyTable(ProductSpace space, std::vector<double> values);

  const ProductSpace& space() const noexcept { return space_; }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

 private:
  ProductSpace space_;
  std::vector<double> values_;
};

/// Deterministic coarse-graining between finite spaces.
class ScaleMap {
 public:
  ScaleMap(ProductSpace source, ProductSpace target, std::vector<std::size_t> map);

  static ScaleMap identity(const ProductSpace& space);
  /// Projection that drops the last axis of `space`.
  static ScaleMap decimation(const ProductSpace& space);

  const ProductSpace& source() const noexcept { return source_; }
  const ProductSpace& target() const noexcept { return target_; }
  std::span<const std::size_t> map() const noexcept { return map_; }
  std::size_t operator()(std::size_t i) const { return map_[i]; }

 private:
  ProductSpace source_;
  ProductSpace target_;
  std::vector<std::size_t> map_;
};

/// Chain of decimations of `space` down to `levels` scales (levels-1 maps).
std::vector<ScaleMap> decimation_chain(const ProductSpace& space, std::size_t levels);

/// Reverse conditional law of a fine-scale state given its coarse image.
///
/// Row j is the source distribution restricted to the fiber t^{-1}(j) and
/// renormalized; rows whose fiber carries no mass are undefined.
class ConditionalTable {
 public:
  ConditionalTable(ScaleMap map, std::vector<double> weights, std::vector<bool> defined);

  const ProductSpace& given_space() const noexcept { return map_.target(); }
  const ProductSpace& output_space() const noexcept { return map_.source(); }
  const ScaleMap& scale_map() const noexcept { return map_; }

  bool defined(std::size_t given) const { return defined_.at(given); }
  /// Conditional probability of source state i given its image t(i).
  double weight(std::size_t source_index) const { return weights_[source_index]; }
  /// Row `given` as a distribution over the output space, if defined.
  std::optional<TabularDist> row(std::size_t given) const;

 private:
  ScaleMap map_;
  std::vector<double> weights_;
  std::vector<bool> defined_;
};

double shannon_entropy(const TabularDist& p);
double kl(const TabularDist& p, const TabularDist& q);
double renyi_entropy(const TabularDist& p, double order);
/// Infinite when the supports are disjoint.
double renyi_divergence(const TabularDist& q, const TabularDist& r, double order);
double total_variation(const TabularDist& p, const TabularDist& q);
double expectation(const TabularDist& p, const EnergyTable& f);

/// Escort distribution proportional to p^theta.
TabularDist scale(const TabularDist& p, double theta);
/// Geometric mean proportional to p^theta q^(1-theta). Endpoints return the
/// corresponding argument unchanged.
TabularDist tilt(const TabularDist& p, const TabularDist& q, double theta);
/// Distribution proportional to exp(-beta f) q.
TabularDist gibbs(const EnergyTable& f, const TabularDist& q, double beta);

TabularDist pushforward(const TabularDist& p, const ScaleMap& t);
ConditionalTable reverse_conditional(const TabularDist& p, const ScaleMap& t);

/// Concatenates a coarse marginal with one conditional table:
/// out(i) = coarse(t(i)) * cond(i | t(i)).
TabularDist compose(const TabularDist& coarse, const ConditionalTable& conditional);

/// Rebuilds the finest distribution from the coarsest marginal and the chain
/// of reverse conditionals. `conditionals[k]` maps scale k+2 back to scale k+1,
/// i.e. it is built from the k-th ScaleMap of the chain.
TabularDist refine(const TabularDist& coarsest, std::span<const ConditionalTable> conditionals);

/// Marginals at every scale: result[k] is the law of W^(k+1).
std::vector<TabularDist> scale_marginals(const TabularDist& p, std::span<const ScaleMap> chain);

double multiscale_relative_entropy(const TabularDist& p, const TabularDist& q,
                                   const TemperatureSchedule& sched,
                                   std::span<const ScaleMap> chain);
double multiscale_shannon_entropy(const TabularDist& p, const TemperatureSchedule& sched,
                                  std::span<const ScaleMap> chain);

/// Checks that the chain starts at `space`, links up, and has sched.levels()-1 maps.
void validate_chain(const ProductSpace& space, std::span<const ScaleMap> chain, std::size_t levels);

}  // namespace msent
