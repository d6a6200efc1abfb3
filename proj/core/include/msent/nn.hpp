#pragma once

// Residual tanh networks, teacher-student data and the Gaussian multiscale
// posterior over their weights.
//
// Weights are flattened layer-major, row-major within a layer: entry (a, b) of
// layer k (0-based) sits at k*m*m + a*m + b. Block k of layer_partition() is
// layer k+1, so decimation removes the deepest layer first.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "msent/gaussian.hpp"

namespace msent::nn {

struct NetShape {
  Index width = 1;
  std::size_t depth = 1;
  /// Bound on input norms, used by bound reporting only.
  double input_radius = 1.0;

  Index params_per_layer() const { return width * width; }
  Index param_count() const { return static_cast<Index>(depth) * params_per_layer(); }
  void validate() const;
};

class ResNetParams {
 public:
  explicit ResNetParams(std::vector<Matrix> layers);
  static ResNetParams zeros(Index width, std::size_t depth);
  static ResNetParams from_flat(const Vector& flat, Index width, std::size_t depth);

  Index width() const noexcept { return width_; }
  std::size_t depth() const noexcept { return layers_.size(); }
  const std::vector<Matrix>& layers() const noexcept { return layers_; }
  const Matrix& layer(std::size_t k) const { return layers_.at(k); }
  Vector flatten() const;

  /// True when every layer has spectral norm at most 1/depth.
  bool within_spectral_bound() const;

 private:
  Index width_;
  std::vector<Matrix> layers_;
};

double spectral_norm(const Matrix& w);
/// w rescaled so that its spectral norm equals `target` (zero stays zero).
Matrix with_spectral_norm(const Matrix& w, double target);

/// Column j of `inputs` is paired with column j of `targets`.
struct Dataset {
  Matrix inputs;
  Matrix targets;

  Index size() const { return inputs.cols(); }
};

struct ForwardPass {
  Vector output;
  /// h_0 = x, ..., h_d = output.
  std::vector<Vector> hidden;
};

ForwardPass forward(const ResNetParams& params, const Vector& x);
/// Outputs for every column of `inputs`.
Matrix forward_batch(const ResNetParams& params, const Matrix& inputs);

/// |h_i - h_{i-1}|_2 for i = 1..d. Throws SpectralNormViolated unless every
/// layer has spectral norm at most 1/d.
std::vector<double> residual_increment_check(const ResNetParams& params, const Vector& x);

/// Mean squared error (1/n) sum |h(x_j) - y_j|^2.
double empirical_risk(const ResNetParams& params, const Dataset& data);

/// d h_d / d w, an m x (d m^2) matrix in the flattening order above.
Matrix weight_jacobian(const ResNetParams& params, const Vector& x);

/// Gauss-Newton model of the empirical risk around params0, expressed in
/// absolute weight coordinates: value and gradient match the risk at params0.
QuadraticEnergy gauss_newton_energy(const ResNetParams& params0, const Dataset& data);

BlockPartition layer_partition(const NetShape& shape);
GaussianDist iid_prior(const NetShape& shape, double variance);

/// Single-scale Gibbs posterior exp(-f / sigma1) prior, lambda = 1.
GaussianDist gibbs_posterior(const QuadraticEnergy& energy, const GaussianDist& prior,
                             double sigma1);
/// Multiscale posterior from a precomputed single-scale one, under alpha_schedule(alpha, sigma1, d).
GaussianDist multiscale_posterior_from_gibbs(const GaussianDist& gibbs, const GaussianDist& prior,
                                             double alpha, double sigma1,
                                             const BlockPartition& partition);
GaussianDist multiscale_posterior(const QuadraticEnergy& energy, const GaussianDist& prior,
                                  double alpha, double sigma1, const BlockPartition& partition);

struct TeacherStudentConfig {
  NetShape student{10, 4, 1.0};
  std::size_t teacher_depth = 2;
  std::size_t samples = 30;
  double input_variance = 1.0;
  double teacher_variance = 0.1;
  double prior_variance = 5e-5;
  std::uint64_t seed = 0;

  /// M = d / d'.
  double depth_ratio() const;
  void validate() const;
};

struct TeacherStudentData {
  /// Embedded in the student's depth: zero layers first, teacher layers last.
  ResNetParams teacher;
  Dataset train;
};

TeacherStudentData teacher_student_data(const TeacherStudentConfig& cfg);

/// `count` fresh inputs labeled by `teacher`, drawn from the stream `seed`.
Dataset sample_teacher_data(const ResNetParams& teacher, const TeacherStudentConfig& cfg,
                            Index count, std::uint64_t seed);

struct RiskEstimate {
  double estimate;
  double std_error;
};

struct RiskSettings {
  Index test_inputs = 2000;
  Index weight_samples = 200;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

/// Mean test risk of networks drawn from `posterior`. Every weight draw uses
/// its own derived stream, so the result does not depend on `workers`.
RiskEstimate population_risk_mc(const GaussianDist& posterior, const ResNetParams& teacher,
                                const TeacherStudentConfig& cfg, const RiskSettings& settings);

}  // namespace msent::nn
