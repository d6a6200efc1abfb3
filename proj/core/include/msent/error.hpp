#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace msent {

enum class Errc {
  InvalidArgument,
  SpaceMismatch,
  SpaceTooLarge,
  InvalidDistribution,
  AbsoluteContinuityViolation,
  InvalidOrder,
  EmptyGeometricMean,
  VanishingPartitionFunction,
  UndefinedConditionalRow,
  EmptyKeepSet,
  SingularConditioningBlock,
  NotPositiveDefinite,
  NonpositiveTheta,
  DimensionMismatch,
  IndefinitePosterior,
  NonConvergence,
  MassLeakage,
  SpectralNormViolated,
  NegativeDivergenceInput,
  NonIntegerTeacherDepth,
  InvalidConfig,
};

std::string_view to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace msent
