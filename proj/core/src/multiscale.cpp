#include "msent/multiscale.hpp"

#include <algorithm>
#include <string>

namespace msent {

// ---------------------------------------------------------------------------
// TabularChainBackend

TabularChainBackend::TabularChainBackend(ProductSpace space, std::vector<ScaleMap> chain)
    : space_(std::move(space)), chain_(std::move(chain)) {
  validate_chain(space_, chain_, chain_.size() + 1);
}

TabularDist TabularChainBackend::coarse_grain(const TabularDist& p, std::size_t scale) const {
  return pushforward(p, chain_.at(scale - 1));
}

TabularDist TabularChainBackend::refine(const TabularDist& coarse, const TabularDist& fine,
                                        std::size_t scale) const {
  return compose(coarse, reverse_conditional(fine, chain_.at(scale - 1)));
}

// ---------------------------------------------------------------------------
// TabularDecimationBackend

TabularDecimationBackend::TabularDecimationBackend(ProductSpace space, std::size_t levels)
    : space_(std::move(space)), levels_(levels) {
  if (levels_ == 0) throw Error(Errc::InvalidArgument, "at least one scale is required");
  if (levels_ > space_.rank()) {
    throw Error(Errc::InvalidArgument, "decimation needs one axis per dropped scale");
  }
}

TabularDist TabularDecimationBackend::coarse_grain(const TabularDist& p, std::size_t scale) const {
  const std::size_t rank = space_.rank() - (scale - 1);
  if (!(p.space() == space_.leading(rank))) {
    throw Error(Errc::SpaceMismatch, "distribution does not live at the requested scale");
  }
  const std::size_t n = space_.axis_sizes()[rank - 1];
  ProductSpace target = space_.leading(rank - 1);
  std::vector<double> out(target.size(), 0.0);
  const auto probs = p.probs();
  for (std::size_t j = 0; j < out.size(); ++j) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += probs[j * n + k];
    out[j] = s;
  }
  return TabularDist(std::move(target), std::move(out));
}

TabularDist TabularDecimationBackend::refine(const TabularDist& coarse, const TabularDist& fine,
                                             std::size_t scale) const {
  const std::size_t rank = space_.rank() - (scale - 1);
  if (!(fine.space() == space_.leading(rank)) || !(coarse.space() == space_.leading(rank - 1))) {
    throw Error(Errc::SpaceMismatch, "refinement spaces do not match the decimation chain");
  }
  const std::size_t n = space_.axis_sizes()[rank - 1];
  const auto f = fine.probs();
  std::vector<double> out(f.size(), 0.0);
  for (std::size_t j = 0; j < coarse.size(); ++j) {
    if (coarse[j] == 0.0) continue;
    double row = 0.0;
    for (std::size_t k = 0; k < n; ++k) row += f[j * n + k];
    if (row == 0.0) {
      throw Error(Errc::UndefinedConditionalRow,
                  "coarse state " + std::to_string(j) + " has mass but no fine-scale fiber mass");
    }
    for (std::size_t k = 0; k < n; ++k) out[j * n + k] = coarse[j] * f[j * n + k] / row;
  }
  return TabularDist::from_weights(fine.space(), std::move(out));
}

// ---------------------------------------------------------------------------
// GaussianDecimationBackend

GaussianDecimationBackend::GaussianDecimationBackend(BlockPartition partition)
    : partition_(std::move(partition)) {}

Index GaussianDecimationBackend::scale_dim(std::size_t scale) const {
  return partition_.leading_dim(partition_.count() - (scale - 1));
}

GaussianDist GaussianDecimationBackend::coarse_grain(const GaussianDist& p,
                                                     std::size_t scale) const {
  if (p.dim() != scale_dim(scale)) {
    throw Error(Errc::DimensionMismatch, "distribution does not live at the requested scale");
  }
  return marginalize_leading(p, scale_dim(scale + 1));
}

GaussianDist GaussianDecimationBackend::refine(const GaussianDist& coarse, const GaussianDist& fine,
                                               std::size_t scale) const {
  if (fine.dim() != scale_dim(scale) || coarse.dim() != scale_dim(scale + 1)) {
    throw Error(Errc::DimensionMismatch, "refinement dimensions do not match the partition");
  }
  return concat(coarse, fine);
}

// ---------------------------------------------------------------------------
// Entry points

namespace {

std::vector<ScaleMap> checked_chain(const ProductSpace& space, std::span<const ScaleMap> chain,
                                    const TemperatureSchedule& sched) {
  validate_chain(space, chain, sched.levels());
  return {chain.begin(), chain.end()};
}

void require_partition(const BlockPartition& partition, const TemperatureSchedule& sched,
                       Index dim) {
  if (partition.count() != sched.levels()) {
    throw Error(Errc::DimensionMismatch, "partition block count differs from the schedule");
  }
  if (partition.total() != dim) {
    throw Error(Errc::DimensionMismatch, "partition does not cover the distribution");
  }
}

}  // namespace

MultiscaleSolution<TabularDist> solve_max_entropy(const EnergyTable& f,
                                                  const TemperatureSchedule& sched,
                                                  std::span<const ScaleMap> chain) {
  TabularChainBackend backend(f.space(), checked_chain(f.space(), chain, sched));
  TabularDist start = gibbs(f, TabularDist::uniform(f.space()), sched.lambda() / sched.sigma(1));
  return renormalize_max_entropy(backend, std::move(start), sched);
}

MultiscaleSolution<TabularDist> solve_min_relative_entropy(const EnergyTable& f,
                                                           const TabularDist& q,
                                                           const TemperatureSchedule& sched,
                                                           std::span<const ScaleMap> chain) {
  if (!(q.space() == f.space())) throw Error(Errc::SpaceMismatch, "energy and reference spaces differ");
  TabularChainBackend backend(f.space(), checked_chain(f.space(), chain, sched));
  TabularDist start = gibbs(f, q, 1.0 / (sched.lambda() * sched.sigma(1)));
  return renormalize_relative_entropy(backend, std::move(start), q, sched);
}

MultiscaleSolution<TabularDist> solve_mt(const TabularDist& gibbs_dist, const TabularDist& q,
                                         const TemperatureSchedule& sched) {
  if (!(q.space() == gibbs_dist.space())) {
    throw Error(Errc::SpaceMismatch, "Gibbs and reference spaces differ");
  }
  TabularDecimationBackend backend(gibbs_dist.space(), sched.levels());
  return renormalize_relative_entropy(backend, gibbs_dist, q, sched);
}

MultiscaleSolution<GaussianDist> solve_max_entropy(const QuadraticEnergy& f,
                                                   const TemperatureSchedule& sched,
                                                   const BlockPartition& partition) {
  require_partition(partition, sched, f.dim());
  GaussianDecimationBackend backend(partition);
  return renormalize_max_entropy(backend, gibbs(f, sched.lambda() / sched.sigma(1)), sched);
}

MultiscaleSolution<GaussianDist> solve_min_relative_entropy(const QuadraticEnergy& f,
                                                            const GaussianDist& q,
                                                            const TemperatureSchedule& sched,
                                                            const BlockPartition& partition) {
  require_partition(partition, sched, f.dim());
  return solve_mt(gibbs(f, q, 1.0 / (sched.lambda() * sched.sigma(1))), q, sched, partition);
}

MultiscaleSolution<GaussianDist> solve_mt(const GaussianDist& gibbs_dist, const GaussianDist& q,
                                          const TemperatureSchedule& sched,
                                          const BlockPartition& partition) {
  require_partition(partition, sched, gibbs_dist.dim());
  if (q.dim() != gibbs_dist.dim()) throw Error(Errc::DimensionMismatch, "reference dimension");
  GaussianDecimationBackend backend(partition);
  return renormalize_relative_entropy(backend, gibbs_dist, q, sched);
}

namespace {

double rel_error(const Matrix& a, const Matrix& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

}  // namespace

double refinement_error(const MultiscaleSolution<GaussianDist>& solution,
                        const BlockPartition& partition) {
  const GaussianDecimationBackend backend(partition);
  const std::size_t d = partition.count();
  if (solution.intermediates.size() != d) {
    throw Error(Errc::DimensionMismatch, "intermediate count differs from the partition");
  }
  const GaussianDist& top = solution.intermediates[d - 1];
  const Matrix& precision = top.precision();
  double worst = (marginalize_leading(solution.distribution, top.dim()).precision() - precision).norm() /
                 precision.norm();
  for (std::size_t i = 1; i < d; ++i) {
    const Index split = backend.scale_dim(i + 1);
    const auto ours = condition(marginalize_leading(solution.distribution, backend.scale_dim(i)), split);
    const auto theirs = condition(solution.intermediates[i - 1], split);
    worst = std::max({worst, rel_error(ours.cov, theirs.cov), rel_error(ours.gain, theirs.gain),
                      rel_error(ours.offset, theirs.offset)});
  }
  return worst;
}

double relative_entropy_objective(const TabularDist& p, const EnergyTable& f, const TabularDist& q,
                                  const TemperatureSchedule& sched,
                                  std::span<const ScaleMap> chain) {
  return expectation(p, f) + sched.lambda() * multiscale_relative_entropy(p, q, sched, chain);
}

double max_entropy_objective(const TabularDist& p, const EnergyTable& f,
                             const TemperatureSchedule& sched, std::span<const ScaleMap> chain) {
  return sched.lambda() * expectation(p, f) - multiscale_shannon_entropy(p, sched, chain);
}

}  // namespace msent
