#include "msent/error.hpp"

namespace msent {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::SpaceMismatch: return "SpaceMismatch";
    case Errc::SpaceTooLarge: return "SpaceTooLarge";
    case Errc::InvalidDistribution: return "InvalidDistribution";
    case Errc::AbsoluteContinuityViolation: return "AbsoluteContinuityViolation";
    case Errc::InvalidOrder: return "InvalidOrder";
    case Errc::EmptyGeometricMean: return "EmptyGeometricMean";
    case Errc::VanishingPartitionFunction: return "VanishingPartitionFunction";
    case Errc::UndefinedConditionalRow: return "UndefinedConditionalRow";
    case Errc::EmptyKeepSet: return "EmptyKeepSet";
    case Errc::SingularConditioningBlock: return "SingularConditioningBlock";
    case Errc::NotPositiveDefinite: return "NotPositiveDefinite";
    case Errc::NonpositiveTheta: return "NonpositiveTheta";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::IndefinitePosterior: return "IndefinitePosterior";
    case Errc::NonConvergence: return "NonConvergence";
    case Errc::MassLeakage: return "MassLeakage";
    case Errc::SpectralNormViolated: return "SpectralNormViolated";
    case Errc::NegativeDivergenceInput: return "NegativeDivergenceInput";
    case Errc::NonIntegerTeacherDepth: return "NonIntegerTeacherDepth";
    case Errc::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

}  // namespace msent
