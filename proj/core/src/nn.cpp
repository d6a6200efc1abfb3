#include "msent/nn.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "msent/error.hpp"
#include "msent/multiscale.hpp"
#include "msent/parallel.hpp"
#include "msent/random.hpp"
#include "msent/schedule.hpp"

namespace msent::nn {

namespace {

constexpr std::uint64_t kTeacherStream = 1;
constexpr std::uint64_t kTrainStream = 2;
constexpr std::uint64_t kTestStream = 3;
constexpr std::uint64_t kWeightStreamBase = 1'000'000;

// Relative slack on the spectral-norm test, so that projected weights pass.
constexpr double kSpectralSlack = 1e-12;

Matrix gaussian_matrix(Index rows, Index cols, double variance, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(variance));
  Matrix out(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) out(i, j) = normal(rng);
  }
  return out;
}

}  // namespace

void NetShape::validate() const {
  if (width < 1) throw Error(Errc::InvalidArgument, "network width must be at least 1");
  if (depth < 1) throw Error(Errc::InvalidArgument, "network depth must be at least 1");
  if (!(input_radius > 0.0)) throw Error(Errc::InvalidArgument, "input radius must be positive");
}

// ---------------------------------------------------------------------------
// ResNetParams

ResNetParams::ResNetParams(std::vector<Matrix> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw Error(Errc::InvalidArgument, "a network needs at least one layer");
  width_ = layers_.front().rows();
  for (const Matrix& w : layers_) {
    if (w.rows() != width_ || w.cols() != width_) {
      throw Error(Errc::DimensionMismatch, "every layer must be a square matrix of the same width");
    }
    if (!w.allFinite()) throw Error(Errc::InvalidArgument, "layer weights must be finite");
  }
}

ResNetParams ResNetParams::zeros(Index width, std::size_t depth) {
  return ResNetParams(std::vector<Matrix>(depth, Matrix::Zero(width, width)));
}

ResNetParams ResNetParams::from_flat(const Vector& flat, Index width, std::size_t depth) {
  const Index per = width * width;
  if (flat.size() != per * static_cast<Index>(depth)) {
    throw Error(Errc::DimensionMismatch, "flat weight vector has the wrong length");
  }
  std::vector<Matrix> layers;
  layers.reserve(depth);
  for (std::size_t k = 0; k < depth; ++k) {
    // row-major within a layer
    layers.push_back(Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        flat.data() + static_cast<Index>(k) * per, width, width));
  }
  return ResNetParams(std::move(layers));
}

Vector ResNetParams::flatten() const {
  const Index per = width_ * width_;
  Vector out(per * static_cast<Index>(layers_.size()));
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        out.data() + static_cast<Index>(k) * per, width_, width_) = layers_[k];
  }
  return out;
}

bool ResNetParams::within_spectral_bound() const {
  const double bound = 1.0 / static_cast<double>(layers_.size());
  for (const Matrix& w : layers_) {
    if (spectral_norm(w) > bound * (1.0 + kSpectralSlack)) return false;
  }
  return true;
}

double spectral_norm(const Matrix& w) {
  if (w.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(w);
  return svd.singularValues()(0);
}

Matrix with_spectral_norm(const Matrix& w, double target) {
  const double s = spectral_norm(w);
  if (s == 0.0) return w;
  return w * (target / s);
}

// ---------------------------------------------------------------------------
// Forward and derivatives

ForwardPass forward(const ResNetParams& params, const Vector& x) {
  if (x.size() != params.width()) throw Error(Errc::DimensionMismatch, "input width differs");
  ForwardPass out;
  out.hidden.reserve(params.depth() + 1);
  out.hidden.push_back(x);
  for (const Matrix& w : params.layers()) {
    const Vector& h = out.hidden.back();
    out.hidden.push_back((w * h).array().tanh().matrix() + h);
  }
  out.output = out.hidden.back();
  return out;
}

Matrix forward_batch(const ResNetParams& params, const Matrix& inputs) {
  if (inputs.rows() != params.width()) throw Error(Errc::DimensionMismatch, "input width differs");
  Matrix h = inputs;
  Matrix pre(h.rows(), h.cols());
  for (const Matrix& w : params.layers()) {
    pre.noalias() = w * h;
    // tanh(x) = 1 - 2 / (exp(2x) + 1); Eigen vectorizes exp but not tanh for doubles.
    h.array() += 1.0 - 2.0 / ((2.0 * pre.array()).exp() + 1.0);
  }
  return h;
}

std::vector<double> residual_increment_check(const ResNetParams& params, const Vector& x) {
  if (!params.within_spectral_bound()) {
    throw Error(Errc::SpectralNormViolated, "some layer has spectral norm above 1/depth");
  }
  const ForwardPass pass = forward(params, x);
  std::vector<double> out(params.depth());
  for (std::size_t i = 1; i <= params.depth(); ++i) {
    out[i - 1] = (pass.hidden[i] - pass.hidden[i - 1]).norm();
  }
  return out;
}

double empirical_risk(const ResNetParams& params, const Dataset& data) {
  if (data.targets.rows() != data.inputs.rows() || data.targets.cols() != data.inputs.cols()) {
    throw Error(Errc::DimensionMismatch, "inputs and targets differ in shape");
  }
  if (data.size() == 0) throw Error(Errc::InvalidArgument, "empty dataset");
  const Matrix residual = forward_batch(params, data.inputs) - data.targets;
  return residual.squaredNorm() / static_cast<double>(data.size());
}

Matrix weight_jacobian(const ResNetParams& params, const Vector& x) {
  const Index m = params.width();
  const std::size_t d = params.depth();
  const ForwardPass pass = forward(params, x);
  std::vector<Vector> slope(d);
  for (std::size_t k = 0; k < d; ++k) {
    const Vector pre = params.layer(k) * pass.hidden[k];
    slope[k] = (1.0 - pre.array().tanh().square()).matrix();
  }
  Matrix J(m, static_cast<Index>(d) * m * m);
  // through = d h_d / d h_k, built from the top layer down
  Matrix through = Matrix::Identity(m, m);
  for (std::size_t k = d; k-- > 0;) {
    const Vector& h_prev = pass.hidden[k];
    const Index base = static_cast<Index>(k) * m * m;
    for (Index a = 0; a < m; ++a) {
      const Vector col = through.col(a) * slope[k][a];
      for (Index b = 0; b < m; ++b) J.col(base + a * m + b) = col * h_prev[b];
    }
    through = through * (Matrix::Identity(m, m) + slope[k].asDiagonal() * params.layer(k));
  }
  return J;
}

QuadraticEnergy gauss_newton_energy(const ResNetParams& params0, const Dataset& data) {
  if (data.size() == 0) throw Error(Errc::InvalidArgument, "empty dataset");
  const Index p = params0.width() * params0.width() * static_cast<Index>(params0.depth());
  Matrix K = Matrix::Zero(p, p);
  Vector g = Vector::Zero(p);
  double c = 0.0;
  for (Index j = 0; j < data.size(); ++j) {
    const Vector x = data.inputs.col(j);
    const Vector r = forward(params0, x).output - data.targets.col(j);
    const Matrix J = weight_jacobian(params0, x);
    c += r.squaredNorm();
    g.noalias() += J.transpose() * r;
    K.selfadjointView<Eigen::Lower>().rankUpdate(J.transpose());
  }
  const double n = static_cast<double>(data.size());
  K = K.selfadjointView<Eigen::Lower>();
  K *= 2.0 / n;
  g *= 2.0 / n;
  c /= n;
  // Re-center from w - w0 to absolute coordinates.
  const Vector w0 = params0.flatten();
  if (!w0.isZero(0.0)) {
    const Vector Kw0 = K * w0;
    c += -g.dot(w0) + 0.5 * w0.dot(Kw0);
    g -= Kw0;
  }
  return QuadraticEnergy(std::move(K), std::move(g), c);
}

// ---------------------------------------------------------------------------
// Posterior

BlockPartition layer_partition(const NetShape& shape) {
  shape.validate();
  return BlockPartition::uniform(shape.depth, shape.params_per_layer());
}

GaussianDist iid_prior(const NetShape& shape, double variance) {
  shape.validate();
  return GaussianDist::isotropic(shape.param_count(), variance);
}

GaussianDist gibbs_posterior(const QuadraticEnergy& energy, const GaussianDist& prior,
                             double sigma1) {
  if (!(sigma1 > 0.0)) throw Error(Errc::InvalidArgument, "sigma1 must be positive");
  return gibbs(energy, prior, 1.0 / sigma1);
}

GaussianDist multiscale_posterior_from_gibbs(const GaussianDist& gibbs_dist,
                                             const GaussianDist& prior, double alpha,
                                             double sigma1, const BlockPartition& partition) {
  const TemperatureSchedule sched = alpha_schedule(alpha, sigma1, partition.count());
  return solve_mt(gibbs_dist, prior, sched, partition).distribution;
}

GaussianDist multiscale_posterior(const QuadraticEnergy& energy, const GaussianDist& prior,
                                  double alpha, double sigma1, const BlockPartition& partition) {
  return multiscale_posterior_from_gibbs(gibbs_posterior(energy, prior, sigma1), prior, alpha,
                                         sigma1, partition);
}

// ---------------------------------------------------------------------------
// Teacher-student

double TeacherStudentConfig::depth_ratio() const {
  return static_cast<double>(student.depth) / static_cast<double>(teacher_depth);
}

void TeacherStudentConfig::validate() const {
  student.validate();
  if (teacher_depth < 1 || teacher_depth > student.depth) {
    throw Error(Errc::InvalidArgument, "teacher depth must lie in [1, student depth]");
  }
  if (samples < 1) throw Error(Errc::InvalidArgument, "training set must be nonempty");
  if (!(input_variance > 0.0) || !(teacher_variance > 0.0) || !(prior_variance > 0.0)) {
    throw Error(Errc::InvalidArgument, "variances must be positive");
  }
}

TeacherStudentData teacher_student_data(const TeacherStudentConfig& cfg) {
  cfg.validate();
  const Index m = cfg.student.width;
  std::mt19937_64 rng(derive_seed(cfg.seed, kTeacherStream));
  std::vector<Matrix> layers(cfg.student.depth - cfg.teacher_depth, Matrix::Zero(m, m));
  for (std::size_t k = 0; k < cfg.teacher_depth; ++k) {
    layers.push_back(gaussian_matrix(m, m, cfg.teacher_variance, rng));
  }
  ResNetParams teacher(std::move(layers));
  Dataset train = sample_teacher_data(teacher, cfg, static_cast<Index>(cfg.samples),
                                      derive_seed(cfg.seed, kTrainStream));
  return {std::move(teacher), std::move(train)};
}

Dataset sample_teacher_data(const ResNetParams& teacher, const TeacherStudentConfig& cfg,
                            Index count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Dataset out;
  out.inputs = gaussian_matrix(teacher.width(), count, cfg.input_variance, rng);
  out.targets = forward_batch(teacher, out.inputs);
  return out;
}

RiskEstimate population_risk_mc(const GaussianDist& posterior, const ResNetParams& teacher,
                                const TeacherStudentConfig& cfg, const RiskSettings& settings) {
  const Index m = teacher.width();
  const std::size_t d = teacher.depth();
  if (posterior.dim() != m * m * static_cast<Index>(d)) {
    throw Error(Errc::DimensionMismatch, "posterior dimension does not match the network");
  }
  if (settings.test_inputs < 1 || settings.weight_samples < 1) {
    throw Error(Errc::InvalidArgument, "risk estimation needs test inputs and weight samples");
  }
  const Dataset test = sample_teacher_data(teacher, cfg, settings.test_inputs,
                                           derive_seed(settings.seed, kTestStream));
  posterior.cholesky_factor();  // build the shared factor before the workers start

  const auto count = static_cast<std::size_t>(settings.weight_samples);
  std::vector<double> risks(count);
  parallel_for(count, settings.workers, [&](std::size_t s) {
    std::mt19937_64 rng(derive_seed(settings.seed, kWeightStreamBase + s));
    const ResNetParams w = ResNetParams::from_flat(sample(posterior, rng), m, d);
    risks[s] = empirical_risk(w, test);
  });

  double mean = 0.0;
  for (double r : risks) mean += r;
  mean /= static_cast<double>(count);
  double var = 0.0;
  for (double r : risks) var += (r - mean) * (r - mean);
  const double se =
      count > 1 ? std::sqrt(var / static_cast<double>(count - 1) / static_cast<double>(count)) : 0.0;
  return {mean, se};
}

}  // namespace msent::nn
