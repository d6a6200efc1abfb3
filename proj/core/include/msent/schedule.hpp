#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace msent {

/// Per-scale weights (sigma_1..sigma_d) and the Lagrange multiplier lambda.
///
/// Scale indices are 1-based throughout the public API: scale 1 is the finest
/// (the full object) and scale d the coarsest.
class TemperatureSchedule {
 public:
  TemperatureSchedule(double lambda, std::vector<double> sigma);

  double lambda() const noexcept { return lambda_; }
  std::span<const double> sigma() const noexcept { return sigma_; }
  double sigma(std::size_t scale) const { return sigma_.at(scale - 1); }
  std::size_t levels() const noexcept { return sigma_.size(); }

  /// sigma_1 + ... + sigma_scale
  double partial_sum(std::size_t scale) const;

  /// Exponent applied at renormalization step `scale` (2 <= scale <= d):
  /// (sigma_1 + ... + sigma_{scale-1}) / (sigma_1 + ... + sigma_scale).
  /// Exactly 1 when sigma_scale == 0.
  double tilting_index(std::size_t scale) const;

  /// Weights lambda*sigma_i.
  std::vector<double> temperature_vector() const;

 private:
  double lambda_;
  std::vector<double> sigma_;
  std::vector<double> partial_;
};

/// Schedule with sigma_i / (sigma_1 + ... + sigma_i) = alpha for every i >= 2, so
/// that every tilting index equals 1 - alpha.
TemperatureSchedule alpha_schedule(double alpha, double sigma1, std::size_t depth,
                                   double lambda = 1.0);

/// sigma = (sigma1, 0, ..., 0): the single-scale problem.
TemperatureSchedule single_scale_schedule(double sigma1, std::size_t depth, double lambda = 1.0);

}  // namespace msent
