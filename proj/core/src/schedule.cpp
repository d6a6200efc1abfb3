#include "msent/schedule.hpp"

#include <cmath>
#include <string>

#include "msent/error.hpp"

namespace msent {

TemperatureSchedule::TemperatureSchedule(double lambda, std::vector<double> sigma)
    : lambda_(lambda), sigma_(std::move(sigma)) {
  if (!(lambda_ > 0.0) || !std::isfinite(lambda_)) {
    throw Error(Errc::InvalidArgument, "lambda must be positive and finite");
  }
  if (sigma_.empty()) {
    throw Error(Errc::InvalidArgument, "schedule needs at least one scale");
  }
  if (!(sigma_[0] > 0.0)) {
    throw Error(Errc::InvalidArgument, "sigma_1 must be positive");
  }
  partial_.reserve(sigma_.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < sigma_.size(); ++i) {
    if (!(sigma_[i] >= 0.0) || !std::isfinite(sigma_[i])) {
      throw Error(Errc::InvalidArgument,
                  "sigma_" + std::to_string(i + 1) + " must be finite and nonnegative");
    }
    acc += sigma_[i];
    partial_.push_back(acc);
  }
}

double TemperatureSchedule::partial_sum(std::size_t scale) const {
  if (scale == 0 || scale > sigma_.size()) {
    throw Error(Errc::InvalidArgument, "scale index out of range");
  }
  return partial_[scale - 1];
}

double TemperatureSchedule::tilting_index(std::size_t scale) const {
  if (scale < 2 || scale > sigma_.size()) {
    throw Error(Errc::InvalidArgument, "tilting index defined for 2 <= scale <= d");
  }
  if (sigma_[scale - 1] == 0.0) {
    return 1.0;
  }
  return partial_[scale - 2] / partial_[scale - 1];
}

std::vector<double> TemperatureSchedule::temperature_vector() const {
  std::vector<double> out(sigma_);
  for (double& s : out) s *= lambda_;
  return out;
}

TemperatureSchedule alpha_schedule(double alpha, double sigma1, std::size_t depth, double lambda) {
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw Error(Errc::InvalidArgument, "alpha must lie in [0, 1)");
  }
  if (depth == 0) {
    throw Error(Errc::InvalidArgument, "depth must be at least 1");
  }
  // S_i = S_{i-1} / (1 - alpha), sigma_i = S_i - S_{i-1} = alpha * sigma1 * (1-alpha)^{-(i-1)}.
  std::vector<double> sigma(depth);
  sigma[0] = sigma1;
  for (std::size_t i = 1; i < depth; ++i) {
    sigma[i] = alpha * sigma1 * std::pow(1.0 - alpha, -static_cast<double>(i));
  }
  return TemperatureSchedule(lambda, std::move(sigma));
}

TemperatureSchedule single_scale_schedule(double sigma1, std::size_t depth, double lambda) {
  std::vector<double> sigma(depth, 0.0);
  if (depth > 0) sigma[0] = sigma1;
  return TemperatureSchedule(lambda, std::move(sigma));
}

}  // namespace msent
