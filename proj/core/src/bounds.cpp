#include "msent/bounds.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "msent/error.hpp"

namespace msent::bounds {

double BoundConfig::constant() const {
  const double er = std::numbers::e * R;
  return 2.0 * er * er;
}

void BoundConfig::validate() const {
  if (!(R > 0.0) || !std::isfinite(R)) throw Error(Errc::InvalidArgument, "R must be positive");
  if (n < 1) throw Error(Errc::InvalidArgument, "sample count must be positive");
  if (depth < 1) throw Error(Errc::InvalidArgument, "depth must be positive");
}

std::vector<double> scale_divergences(const ReferencePosterior& qhat, const GaussianDist& prior,
                                      const BlockPartition& partition) {
  const std::size_t d = partition.count();
  std::vector<double> out(d);
  if (const auto* dirac = std::get_if<DiracReference>(&qhat)) {
    if (dirac->log_inv_q.size() != d) {
      throw Error(Errc::DimensionMismatch, "Dirac reference needs one value per layer");
    }
    for (double v : dirac->log_inv_q) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw Error(Errc::NegativeDivergenceInput, "log(1/q) must be finite and nonnegative");
      }
    }
    // scale i keeps layers 1..d-i+1
    double running = 0.0;
    std::vector<double> prefix(d);
    for (std::size_t k = 0; k < d; ++k) prefix[k] = running += dirac->log_inv_q[k];
    for (std::size_t i = 1; i <= d; ++i) out[i - 1] = prefix[d - i];
    return out;
  }
  const GaussianDist& g = std::get<GaussianDist>(qhat);
  if (g.dim() != partition.total() || prior.dim() != partition.total()) {
    throw Error(Errc::DimensionMismatch, "reference, prior and partition dimensions differ");
  }
  for (std::size_t i = 1; i <= d; ++i) {
    const Index keep = partition.leading_dim(d - i + 1);
    out[i - 1] = kl(marginalize_leading(g, keep), marginalize_leading(prior, keep));
  }
  return out;
}

double dpg(const ReferencePosterior& qhat, const GaussianDist& prior,
           const BlockPartition& partition, std::size_t scale) {
  if (scale < 1 || scale > partition.count()) {
    throw Error(Errc::InvalidArgument, "scale index out of range");
  }
  const auto D = scale_divergences(qhat, prior, partition);
  return std::sqrt(D.front()) - std::sqrt(D[scale - 1]);
}

double variational_term(double gamma, double divergence) {
  return gamma * divergence + 1.0 / (4.0 * gamma);
}

BoundValue generalization_bound_value(std::span<const double> divergences, const BoundConfig& cfg) {
  cfg.validate();
  if (divergences.empty()) throw Error(Errc::InvalidArgument, "no divergence terms");
  BoundValue out{0.0, {}};
  out.gamma.reserve(divergences.size());
  double sum = 0.0;
  for (double D : divergences) {
    if (!(D >= 0.0)) throw Error(Errc::NegativeDivergenceInput, "divergence terms must be >= 0");
    sum += std::sqrt(D);
    out.gamma.push_back(D > 0.0 ? 1.0 / std::sqrt(4.0 * D)
                                : std::numeric_limits<double>::infinity());
  }
  const double d = static_cast<double>(divergences.size());
  out.value = cfg.constant() / (d * std::sqrt(static_cast<double>(cfg.n))) * sum;
  return out;
}

double excess_risk_single(const ReferencePosterior& qhat, const GaussianDist& prior,
                          const BoundConfig& cfg, const BlockPartition& partition) {
  const auto D = scale_divergences(qhat, prior, partition);
  return generalization_bound_value(std::span(D).first(1), cfg).value;
}

double excess_risk_multiscale(const ReferencePosterior& qhat, const GaussianDist& prior,
                              const BoundConfig& cfg, const BlockPartition& partition) {
  const auto D = scale_divergences(qhat, prior, partition);
  return generalization_bound_value(D, cfg).value;
}

DpgSum teacher_student_dpg_sum(std::size_t depth, double ratio, double log_inv_q2) {
  if (depth < 1) throw Error(Errc::InvalidArgument, "depth must be positive");
  if (!(ratio > 1.0)) throw Error(Errc::InvalidArgument, "depth ratio must exceed 1");
  if (!(log_inv_q2 >= 0.0)) throw Error(Errc::NegativeDivergenceInput, "log(1/q2) must be >= 0");
  const double teacher = static_cast<double>(depth) / ratio;
  const double rounded = std::round(teacher);
  if (rounded < 1.0 || std::abs(teacher - rounded) > 1e-9 * teacher) {
    throw Error(Errc::NonIntegerTeacherDepth,
                "d/M = " + std::to_string(teacher) + " is not a positive integer");
  }
  const auto dp = static_cast<std::size_t>(rounded);
  double tail = 0.0;
  for (std::size_t j = 1; j <= dp; ++j) tail += std::sqrt(static_cast<double>(j));
  const double root = std::sqrt(log_inv_q2);
  const double d = static_cast<double>(depth);
  DpgSum out{};
  out.exact = root * (d * std::sqrt(rounded) - tail);
  out.approx = root * std::pow(d, 1.5) * (ratio - 2.0 / 3.0) / std::pow(ratio, 1.5);
  return out;
}

DiracReference teacher_student_reference(std::size_t depth, std::size_t teacher_depth,
                                         double log_inv_q1, double log_inv_q2) {
  if (teacher_depth < 1 || teacher_depth > depth) {
    throw Error(Errc::InvalidArgument, "teacher depth must lie in [1, depth]");
  }
  DiracReference ref;
  ref.log_inv_q.assign(depth - teacher_depth, log_inv_q1);
  ref.log_inv_q.insert(ref.log_inv_q.end(), teacher_depth, log_inv_q2);
  return ref;
}

nlohmann::json bound_report(const ReferencePosterior& qhat, const GaussianDist& prior,
                            const BoundConfig& cfg, const BlockPartition& partition) {
  cfg.validate();
  if (cfg.depth != partition.count()) {
    throw Error(Errc::DimensionMismatch, "bound depth differs from the layer partition");
  }
  const auto D = scale_divergences(qhat, prior, partition);
  const BoundValue multi = generalization_bound_value(D, cfg);
  const double single = generalization_bound_value(std::span(D).first(1), cfg).value;

  nlohmann::json scales = nlohmann::json::array();
  double dpg_sum = 0.0;
  for (std::size_t i = 0; i < D.size(); ++i) {
    const double gain = std::sqrt(D.front()) - std::sqrt(D[i]);
    dpg_sum += gain;
    nlohmann::json gamma = std::isfinite(multi.gamma[i]) ? nlohmann::json(multi.gamma[i])
                                                         : nlohmann::json("inf");
    scales.push_back({{"scale", i + 1}, {"divergence", D[i]}, {"gamma", gamma}, {"dpg", gain}});
  }
  const double d = static_cast<double>(cfg.depth);
  return {
      {"reference", std::holds_alternative<DiracReference>(qhat) ? "dirac" : "gaussian"},
      {"R", cfg.R},
      {"n", cfg.n},
      {"depth", cfg.depth},
      {"C", cfg.constant()},
      {"C_convention", "C = 2(eR)^2 taken as stated; sub-Gaussian constant not re-derived"},
      {"scales", scales},
      {"excess_risk_single", single},
      {"excess_risk_multiscale", multi.value},
      {"dpg_sum", dpg_sum},
      {"difference_from_dpg", cfg.constant() / (d * std::sqrt(static_cast<double>(cfg.n))) * dpg_sum},
  };
}

}  // namespace msent::bounds
