#pragma once

// Excess-risk bounds for Gibbs posteriors over layered networks.

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "msent/gaussian.hpp"

namespace msent::bounds {

struct BoundConfig {
  /// Bound on input norms.
  double R = 1.0;
  std::size_t n = 1;
  std::size_t depth = 1;

  /// C = 2 (e R)^2.
  double constant() const;
  void validate() const;
};

/// Point-mass reference: per-layer values log(1/q_k) of the prior density at
/// the reference weights, so that D(Dirac || Q) over kept layers is their sum.
struct DiracReference {
  std::vector<double> log_inv_q;
};

using ReferencePosterior = std::variant<GaussianDist, DiracReference>;

/// D(Qhat_(i) || Q_(i)) for i = 1..d under decimation. `prior` is only used
/// for Gaussian references.
std::vector<double> scale_divergences(const ReferencePosterior& qhat, const GaussianDist& prior,
                                      const BlockPartition& partition);

/// sqrt(D_1) - sqrt(D_i), 1-based scale.
double dpg(const ReferencePosterior& qhat, const GaussianDist& prior,
           const BlockPartition& partition, std::size_t scale);

/// (C / sqrt(n)) sqrt(D(Qhat || Q)).
double excess_risk_single(const ReferencePosterior& qhat, const GaussianDist& prior,
                          const BoundConfig& cfg, const BlockPartition& partition);
/// (C / (d sqrt(n))) sum_i sqrt(D_i).
double excess_risk_multiscale(const ReferencePosterior& qhat, const GaussianDist& prior,
                              const BoundConfig& cfg, const BlockPartition& partition);

struct BoundValue {
  double value;
  /// Minimizing gamma_i = 1/sqrt(4 D_i); +inf where D_i = 0.
  std::vector<double> gamma;
};

/// (C / (d sqrt(n))) inf_gamma sum_i (gamma_i D_i + 1/(4 gamma_i)), d = D.size().
BoundValue generalization_bound_value(std::span<const double> divergences, const BoundConfig& cfg);

/// gamma D + 1/(4 gamma) for one scale.
double variational_term(double gamma, double divergence);

struct DpgSum {
  double exact;
  double approx;
};

/// Sum of DPG(i) for a depth-d/M teacher embedded in a depth-d student with
/// the zero layers' log(1/q_1) neglected.
DpgSum teacher_student_dpg_sum(std::size_t depth, double ratio, double log_inv_q2);

/// Dirac reference for that teacher: log(1/q_1) on the first d - d' layers,
/// log(1/q_2) on the last d'.
DiracReference teacher_student_reference(std::size_t depth, std::size_t teacher_depth,
                                         double log_inv_q1, double log_inv_q2);

/// Per-scale divergences, gamma, DPG and both totals.
nlohmann::json bound_report(const ReferencePosterior& qhat, const GaussianDist& prior,
                            const BoundConfig& cfg, const BlockPartition& partition);

}  // namespace msent::bounds
