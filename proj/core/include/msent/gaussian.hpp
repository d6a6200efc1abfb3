#pragma once

// Closed-form multivariate Gaussian algebra.

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <random>
#include <vector>

namespace msent {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// N(mean, cov), strictly positive definite.
///
/// A distribution is built either from its covariance or from its precision;
/// the other matrix and the covariance Cholesky factor are computed on first
/// use and shared between copies. Values are immutable and safe to read from
/// several threads.
class GaussianDist {
 public:
  static GaussianDist from_covariance(Vector mean, Matrix cov);
  static GaussianDist from_precision(Vector mean, Matrix precision);
  /// Precision form with information vector h = precision * mean.
  static GaussianDist from_information(const Vector& info, Matrix precision);
  static GaussianDist isotropic(Index dim, double variance);

  Index dim() const;
  const Vector& mean() const;
  const Matrix& covariance() const;
  const Matrix& precision() const;
  /// Lower-triangular C with covariance = C C^T.
  const Matrix& cholesky_factor() const;
  double log_det_covariance() const;
  bool built_from_precision() const;

 private:
  struct State;
  explicit GaussianDist(std::shared_ptr<const State> state);
  std::shared_ptr<const State> s_;
};

/// Sizes of consecutive coordinate blocks (one block per layer, in order).
class BlockPartition {
 public:
  explicit BlockPartition(std::vector<Index> block_sizes);
  static BlockPartition uniform(std::size_t blocks, Index block_size);

  std::size_t count() const noexcept { return sizes_.size(); }
  Index size(std::size_t block) const { return sizes_.at(block); }
  Index offset(std::size_t block) const { return offsets_.at(block); }
  Index total() const noexcept { return offsets_.back(); }
  /// Dimension spanned by the first `blocks` blocks.
  Index leading_dim(std::size_t blocks) const { return offsets_.at(blocks); }
  const std::vector<Index>& sizes() const noexcept { return sizes_; }

  friend bool operator==(const BlockPartition&, const BlockPartition&) = default;

 private:
  std::vector<Index> sizes_;
  std::vector<Index> offsets_;
};

struct BlockRange {
  std::size_t first = 0;
  std::size_t count = 0;
};

/// Law of x[split:] given x[:split] = a: N(offset + gain * a, cov).
struct GaussianConditional {
  Matrix gain;
  Vector offset;
  Matrix cov;

  Vector mean_given(const Vector& a) const { return offset + gain * a; }
};

/// Quadratic model f(w) = c + g^T w + 1/2 w^T K w with K symmetric PSD.
class QuadraticEnergy {
 public:
  /// Symmetrizes K; eigenvalues in [-floor, 0) are clipped to zero.
  QuadraticEnergy(Matrix K, Vector g, double c);

  const Matrix& K() const noexcept { return K_; }
  const Vector& g() const noexcept { return g_; }
  double c() const noexcept { return c_; }
  Index dim() const noexcept { return g_.size(); }

  double value(const Vector& w) const;
  Vector gradient(const Vector& w) const;

 private:
  Matrix K_;
  Vector g_;
  double c_;
};

GaussianDist marginalize(const GaussianDist& g, const BlockPartition& partition, BlockRange keep);
/// Marginal of the first `dim` coordinates.
GaussianDist marginalize_leading(const GaussianDist& g, Index dim);

GaussianConditional condition(const GaussianDist& g, Index split);

/// Escort of a Gaussian density: N(mean, cov / theta).
GaussianDist scale(const GaussianDist& g, double theta);
/// Normalized geometric mean p^theta q^(1-theta): precisions combine convexly.
GaussianDist tilt(const GaussianDist& p, const GaussianDist& q, double theta);
/// u1 over x1 followed by u2's conditional law of x2 given x1.
GaussianDist concat(const GaussianDist& u1, const GaussianDist& u2);

double kl(const GaussianDist& p, const GaussianDist& q);

Vector sample(const GaussianDist& g, std::mt19937_64& rng);
/// `count` draws as the columns of a dim x count matrix.
Matrix sample(const GaussianDist& g, Index count, std::mt19937_64& rng);

/// Posterior proportional to exp(-beta f) prior.
GaussianDist gibbs(const QuadraticEnergy& energy, const GaussianDist& prior, double beta);
/// Density proportional to exp(-beta f) against Lebesgue measure; K must be PD.
GaussianDist gibbs(const QuadraticEnergy& energy, double beta);

/// Log density of g at x.
double log_density(const GaussianDist& g, const Vector& x);

}  // namespace msent
