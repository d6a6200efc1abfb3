#include "msent/gaussian.hpp"

#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "msent/constants.hpp"
#include "msent/error.hpp"

namespace msent {

namespace {

Matrix symmetrized(const Matrix& a, const char* what) {
  if (a.rows() != a.cols()) {
    throw Error(Errc::DimensionMismatch, std::string(what) + " must be square");
  }
  if (!a.allFinite()) {
    throw Error(Errc::InvalidArgument, std::string(what) + " has non-finite entries");
  }
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > Tolerances::symmetry * scale) {
    throw Error(Errc::InvalidArgument, std::string(what) + " is not symmetric");
  }
  return 0.5 * (a + a.transpose());
}

// Cholesky with a relative pivot floor; throws NotPositiveDefinite.
Matrix cholesky_lower(const Matrix& a, const char* what) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw Error(Errc::NotPositiveDefinite, std::string(what) + " is not positive definite");
  }
  Matrix L = llt.matrixL();
  const double floor = Tolerances::cholesky_pivot_floor * a.diagonal().cwiseAbs().maxCoeff();
  for (Index i = 0; i < L.rows(); ++i) {
    if (!(L(i, i) * L(i, i) > floor)) {
      throw Error(Errc::NotPositiveDefinite,
                  std::string(what) + " has a Cholesky pivot below the floor");
    }
  }
  return L;
}

Matrix inverse_from_cholesky(const Matrix& L) {
  const Index n = L.rows();
  Matrix Linv = L.triangularView<Eigen::Lower>().solve(Matrix::Identity(n, n));
  Matrix inv = Linv.transpose() * Linv;
  return 0.5 * (inv + inv.transpose());
}

}  // namespace

// ---------------------------------------------------------------------------
// GaussianDist

struct GaussianDist::State {
  Vector mean;
  bool from_precision = false;
  Matrix primary;
  Matrix primary_chol;
  double log_det_cov = 0.0;

  mutable std::once_flag secondary_once;
  mutable Matrix secondary;
  mutable std::once_flag cov_chol_once;
  mutable Matrix cov_chol;

  const Matrix& secondary_matrix() const {
    std::call_once(secondary_once, [this] { secondary = inverse_from_cholesky(primary_chol); });
    return secondary;
  }
};

GaussianDist::GaussianDist(std::shared_ptr<const State> state) : s_(std::move(state)) {}

GaussianDist GaussianDist::from_covariance(Vector mean, Matrix cov) {
  if (mean.size() == 0 || mean.size() != cov.rows()) {
    throw Error(Errc::DimensionMismatch, "mean and covariance dimensions differ");
  }
  if (!mean.allFinite()) throw Error(Errc::InvalidArgument, "mean has non-finite entries");
  auto s = std::make_shared<State>();
  s->mean = std::move(mean);
  s->from_precision = false;
  s->primary = symmetrized(cov, "covariance");
  s->primary_chol = cholesky_lower(s->primary, "covariance");
  s->log_det_cov = 2.0 * s->primary_chol.diagonal().array().log().sum();
  return GaussianDist(std::move(s));
}

GaussianDist GaussianDist::from_precision(Vector mean, Matrix precision) {
  if (mean.size() == 0 || mean.size() != precision.rows()) {
    throw Error(Errc::DimensionMismatch, "mean and precision dimensions differ");
  }
  if (!mean.allFinite()) throw Error(Errc::InvalidArgument, "mean has non-finite entries");
  auto s = std::make_shared<State>();
  s->mean = std::move(mean);
  s->from_precision = true;
  s->primary = symmetrized(precision, "precision");
  s->primary_chol = cholesky_lower(s->primary, "precision");
  s->log_det_cov = -2.0 * s->primary_chol.diagonal().array().log().sum();
  return GaussianDist(std::move(s));
}

GaussianDist GaussianDist::from_information(const Vector& info, Matrix precision) {
  if (info.size() == 0 || info.size() != precision.rows()) {
    throw Error(Errc::DimensionMismatch, "information vector and precision dimensions differ");
  }
  auto s = std::make_shared<State>();
  s->from_precision = true;
  s->primary = symmetrized(precision, "precision");
  s->primary_chol = cholesky_lower(s->primary, "precision");
  const Matrix& L = s->primary_chol;
  const Vector half = L.triangularView<Eigen::Lower>().solve(info);
  s->mean = L.transpose().triangularView<Eigen::Upper>().solve(half);
  if (!s->mean.allFinite()) throw Error(Errc::InvalidArgument, "information vector is not finite");
  s->log_det_cov = -2.0 * s->primary_chol.diagonal().array().log().sum();
  return GaussianDist(std::move(s));
}

GaussianDist GaussianDist::isotropic(Index dim, double variance) {
  if (!(variance > 0.0)) throw Error(Errc::InvalidArgument, "variance must be positive");
  return from_covariance(Vector::Zero(dim), variance * Matrix::Identity(dim, dim));
}

Index GaussianDist::dim() const { return s_->mean.size(); }
const Vector& GaussianDist::mean() const { return s_->mean; }
bool GaussianDist::built_from_precision() const { return s_->from_precision; }
double GaussianDist::log_det_covariance() const { return s_->log_det_cov; }

const Matrix& GaussianDist::covariance() const {
  return s_->from_precision ? s_->secondary_matrix() : s_->primary;
}

const Matrix& GaussianDist::precision() const {
  return s_->from_precision ? s_->primary : s_->secondary_matrix();
}

const Matrix& GaussianDist::cholesky_factor() const {
  if (!s_->from_precision) return s_->primary_chol;
  const State& s = *s_;
  std::call_once(s.cov_chol_once,
                 [&s] { s.cov_chol = cholesky_lower(s.secondary_matrix(), "covariance"); });
  return s.cov_chol;
}

// ---------------------------------------------------------------------------
// BlockPartition

BlockPartition::BlockPartition(std::vector<Index> block_sizes) : sizes_(std::move(block_sizes)) {
  if (sizes_.empty()) throw Error(Errc::InvalidArgument, "partition needs at least one block");
  offsets_.reserve(sizes_.size() + 1);
  offsets_.push_back(0);
  for (Index s : sizes_) {
    if (s < 1) throw Error(Errc::InvalidArgument, "block sizes must be positive");
    offsets_.push_back(offsets_.back() + s);
  }
}

BlockPartition BlockPartition::uniform(std::size_t blocks, Index block_size) {
  return BlockPartition(std::vector<Index>(blocks, block_size));
}

// ---------------------------------------------------------------------------
// QuadraticEnergy

QuadraticEnergy::QuadraticEnergy(Matrix K, Vector g, double c) : g_(std::move(g)), c_(c) {
  if (K.rows() != K.cols() || K.rows() != g_.size()) {
    throw Error(Errc::DimensionMismatch, "quadratic energy dimensions differ");
  }
  if (!K.allFinite() || !g_.allFinite() || !std::isfinite(c_)) {
    throw Error(Errc::InvalidArgument, "quadratic energy has non-finite entries");
  }
  const double magnitude = std::max(1.0, K.cwiseAbs().maxCoeff());
  if ((K - K.transpose()).cwiseAbs().maxCoeff() > Tolerances::energy_symmetry * magnitude) {
    throw Error(Errc::InvalidArgument, "quadratic energy matrix is not symmetric");
  }
  K_ = 0.5 * (K + K.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(K_);
  const double lowest = eig.eigenvalues().minCoeff();
  if (lowest < -Tolerances::energy_eigen_floor * magnitude) {
    throw Error(Errc::InvalidArgument,
                "quadratic energy matrix has eigenvalue " + std::to_string(lowest));
  }
  if (lowest < 0.0) {
    const Vector clipped = eig.eigenvalues().cwiseMax(0.0);
    K_ = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
    K_ = 0.5 * (K_ + K_.transpose()).eval();
  }
}

double QuadraticEnergy::value(const Vector& w) const {
  return c_ + g_.dot(w) + 0.5 * w.dot(K_ * w);
}

Vector QuadraticEnergy::gradient(const Vector& w) const { return g_ + K_ * w; }

// ---------------------------------------------------------------------------
// Operations

GaussianDist marginalize(const GaussianDist& g, const BlockPartition& partition, BlockRange keep) {
  if (partition.total() != g.dim()) {
    throw Error(Errc::DimensionMismatch, "partition does not cover the distribution");
  }
  if (keep.count == 0) throw Error(Errc::EmptyKeepSet, "nothing to keep");
  if (keep.first + keep.count > partition.count()) {
    throw Error(Errc::InvalidArgument, "kept blocks exceed the partition");
  }
  const Index begin = partition.offset(keep.first);
  const Index len = partition.offset(keep.first + keep.count) - begin;
  if (len == g.dim()) return g;
  return GaussianDist::from_covariance(g.mean().segment(begin, len),
                                       g.covariance().block(begin, begin, len, len));
}

GaussianDist marginalize_leading(const GaussianDist& g, Index dim) {
  if (dim <= 0) throw Error(Errc::EmptyKeepSet, "nothing to keep");
  if (dim > g.dim()) throw Error(Errc::DimensionMismatch, "kept dimension exceeds the distribution");
  if (dim == g.dim()) return g;
  return GaussianDist::from_covariance(g.mean().head(dim), g.covariance().topLeftCorner(dim, dim));
}

GaussianConditional condition(const GaussianDist& g, Index split) {
  const Index n = g.dim();
  if (split <= 0 || split >= n) {
    throw Error(Errc::InvalidArgument, "conditioning split must leave both sides nonempty");
  }
  const Index m = n - split;
  const Matrix& S = g.covariance();
  Eigen::LLT<Matrix> llt(S.topLeftCorner(split, split));
  if (llt.info() != Eigen::Success) {
    throw Error(Errc::SingularConditioningBlock, "conditioning block is not positive definite");
  }
  GaussianConditional out;
  out.gain = llt.solve(S.topRightCorner(split, m)).transpose();
  out.offset = g.mean().tail(m) - out.gain * g.mean().head(split);
  Matrix cov = S.bottomRightCorner(m, m) - out.gain * S.topRightCorner(split, m);
  out.cov = 0.5 * (cov + cov.transpose());
  return out;
}

GaussianDist scale(const GaussianDist& g, double theta) {
  if (!(theta > 0.0) || !std::isfinite(theta)) {
    throw Error(Errc::NonpositiveTheta, "scale exponent must be positive");
  }
  if (theta == 1.0) return g;
  if (g.built_from_precision()) return GaussianDist::from_precision(g.mean(), theta * g.precision());
  return GaussianDist::from_covariance(g.mean(), g.covariance() / theta);
}

GaussianDist tilt(const GaussianDist& p, const GaussianDist& q, double theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) {
    throw Error(Errc::InvalidArgument, "tilt index must lie in [0,1]");
  }
  if (p.dim() != q.dim()) throw Error(Errc::DimensionMismatch, "tilt: dimensions differ");
  if (theta == 1.0) return p;
  if (theta == 0.0) return q;
  const Matrix& Lp = p.precision();
  const Matrix& Lq = q.precision();
  Matrix precision = theta * Lp + (1.0 - theta) * Lq;
  const Vector info = theta * (Lp * p.mean()) + (1.0 - theta) * (Lq * q.mean());
  return GaussianDist::from_information(info, std::move(precision));
}

GaussianDist concat(const GaussianDist& u1, const GaussianDist& u2) {
  const Index k = u1.dim();
  const Index n = u2.dim();
  if (k >= n) {
    throw Error(Errc::DimensionMismatch, "concat: the fine distribution must extend the coarse one");
  }
  const Index m = n - k;
  const Matrix& fine = u2.precision();
  const Matrix B = fine.topRightCorner(k, m);
  const Matrix D = fine.bottomRightCorner(m, m);
  Eigen::LLT<Matrix> llt(D);
  if (llt.info() != Eigen::Success) {
    throw Error(Errc::NotPositiveDefinite, "concat: trailing precision block is not PD");
  }
  const Matrix DinvBt = llt.solve(B.transpose());

  Matrix joint(n, n);
  joint.topLeftCorner(k, k) = u1.precision() + B * DinvBt;
  joint.topRightCorner(k, m) = B;
  joint.bottomLeftCorner(m, k) = B.transpose();
  joint.bottomRightCorner(m, m) = D;

  Vector mean(n);
  mean.head(k) = u1.mean();
  mean.tail(m) = u2.mean().tail(m) - DinvBt * (u1.mean() - u2.mean().head(k));
  return GaussianDist::from_precision(std::move(mean), std::move(joint));
}

double kl(const GaussianDist& p, const GaussianDist& q) {
  if (p.dim() != q.dim()) throw Error(Errc::DimensionMismatch, "kl: dimensions differ");
  const Matrix& Lq = q.precision();
  const Vector diff = q.mean() - p.mean();
  const double trace = Lq.cwiseProduct(p.covariance()).sum();
  const double maha = diff.dot(Lq * diff);
  const double d = 0.5 * (trace + maha - static_cast<double>(p.dim()) + q.log_det_covariance() -
                          p.log_det_covariance());
  return std::max(0.0, d);
}

Vector sample(const GaussianDist& g, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Vector z(g.dim());
  for (Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
  return g.mean() + g.cholesky_factor().triangularView<Eigen::Lower>() * z;
}

Matrix sample(const GaussianDist& g, Index count, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix z(g.dim(), count);
  for (Index j = 0; j < count; ++j) {
    for (Index i = 0; i < z.rows(); ++i) z(i, j) = normal(rng);
  }
  Matrix x = g.cholesky_factor().triangularView<Eigen::Lower>() * z;
  x.colwise() += g.mean();
  return x;
}

GaussianDist gibbs(const QuadraticEnergy& energy, const GaussianDist& prior, double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw Error(Errc::InvalidArgument, "inverse temperature must be positive and finite");
  }
  if (energy.dim() != prior.dim()) {
    throw Error(Errc::DimensionMismatch, "energy and prior dimensions differ");
  }
  const Matrix& Lp = prior.precision();
  Matrix precision = Lp + beta * energy.K();
  const Vector info = Lp * prior.mean() - beta * energy.g();
  try {
    return GaussianDist::from_information(info, std::move(precision));
  } catch (const Error& e) {
    if (e.code() != Errc::NotPositiveDefinite) throw;
    throw Error(Errc::IndefinitePosterior, e.what());
  }
}

GaussianDist gibbs(const QuadraticEnergy& energy, double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw Error(Errc::InvalidArgument, "inverse temperature must be positive and finite");
  }
  try {
    return GaussianDist::from_information(-beta * energy.g(), beta * energy.K());
  } catch (const Error& e) {
    if (e.code() != Errc::NotPositiveDefinite) throw;
    throw Error(Errc::IndefinitePosterior, e.what());
  }
}

double log_density(const GaussianDist& g, const Vector& x) {
  if (x.size() != g.dim()) throw Error(Errc::DimensionMismatch, "log_density: dimension");
  const Vector diff = x - g.mean();
  const Vector z = g.cholesky_factor().triangularView<Eigen::Lower>().solve(diff);
  return -0.5 * (static_cast<double>(g.dim()) * std::log(2.0 * std::numbers::pi) +
                 g.log_det_covariance() + z.squaredNorm());
}

}  // namespace msent
