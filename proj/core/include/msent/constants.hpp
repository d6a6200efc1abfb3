#pragma once

#include <cstddef>

namespace msent {

// Every numerical threshold used by the library lives here.
struct Tolerances {
  // Probability tables must sum to one within this.
  static constexpr double normalization = 1e-12;
  // Algebraic identities (chain rule, mixing, tilt) hold within this.
  static constexpr double identity = 1e-10;
  // Covariance/precision inputs must be symmetric within this before symmetrization.
  static constexpr double symmetry = 1e-10;
  // Smallest admissible Cholesky pivot, relative to the largest diagonal entry.
  static constexpr double cholesky_pivot_floor = 1e-12;
  // Gauss-Newton matrices: symmetry tolerance and negative-eigenvalue floor.
  static constexpr double energy_symmetry = 1e-8;
  static constexpr double energy_eigen_floor = 1e-8;
  // Quadrature: largest share of the mass on one boundary node.
  static constexpr double mass_leakage = 1e-10;
  // Default cap on the number of joint states of a ProductSpace.
  static constexpr std::size_t max_space_size = 1'000'000;
};

}  // namespace msent
