#include "msent/io.hpp"

#include <cmath>

#include "msent/error.hpp"

namespace msent::io {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(Errc::InvalidConfig, path + ": " + what);
}

Json flat_matrix(const Matrix& a) {
  Json out = Json::array();
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) out.push_back(a(i, j));
  }
  return out;
}

Json columns(const Matrix& a) {
  Json out = Json::array();
  for (Index j = 0; j < a.cols(); ++j) {
    Json col = Json::array();
    for (Index i = 0; i < a.rows(); ++i) col.push_back(a(i, j));
    out.push_back(std::move(col));
  }
  return out;
}

Matrix matrix_from_columns(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a nonempty array of vectors");
  const std::size_t rows = numbers(j[0], path + "[0]").size();
  Matrix out(static_cast<Index>(rows), static_cast<Index>(j.size()));
  for (std::size_t c = 0; c < j.size(); ++c) {
    const std::string p = path + "[" + std::to_string(c) + "]";
    const auto v = numbers(j[c], p);
    if (v.size() != rows) fail(p, "all vectors must have the same length");
    for (std::size_t r = 0; r < rows; ++r) out(static_cast<Index>(r), static_cast<Index>(c)) = v[r];
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Accessors

const Json& field(const Json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) fail(path, "missing field '" + key + "'");
  return *it;
}

double number(const Json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "expected a finite number");
  return v;
}

std::size_t count(const Json& j, const std::string& path) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) fail(path, "expected an integer");
  if (j.is_number_integer() && j.get<long long>() < 0) fail(path, "expected a nonnegative integer");
  return j.get<std::size_t>();
}

std::vector<double> numbers(const Json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<std::size_t> counts(const Json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of integers");
  std::vector<std::size_t> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(count(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

// ---------------------------------------------------------------------------
// Encoders

Json to_json(const TabularDist& p) {
  return {{"axis_sizes", std::vector<std::size_t>(p.space().axis_sizes().begin(), p.space().axis_sizes().end())},
          {"probs", std::vector<double>(p.probs().begin(), p.probs().end())}};
}

Json to_json(const EnergyTable& f) {
  return {{"axis_sizes", std::vector<std::size_t>(f.space().axis_sizes().begin(), f.space().axis_sizes().end())},
          {"values", std::vector<double>(f.values().begin(), f.values().end())}};
}

Json to_json(const ScaleMap& t) {
  auto axes = [](const ProductSpace& s) {
    return std::vector<std::size_t>(s.axis_sizes().begin(), s.axis_sizes().end());
  };
  return {{"source_axis_sizes", axes(t.source())},
          {"target_axis_sizes", axes(t.target())},
          {"map", std::vector<std::size_t>(t.map().begin(), t.map().end())}};
}

Json to_json(const GaussianDist& g, const BlockPartition& partition) {
  std::vector<double> mean(g.mean().data(), g.mean().data() + g.dim());
  std::vector<long long> blocks(partition.sizes().begin(), partition.sizes().end());
  return {{"mean", mean}, {"cov", flat_matrix(g.covariance())}, {"block_sizes", blocks}};
}

Json to_json(const nn::ResNetParams& params) {
  Json layers = Json::array();
  for (const Matrix& w : params.layers()) layers.push_back(flat_matrix(w));
  return {{"width", params.width()}, {"layers", layers}};
}

Json to_json(const nn::Dataset& data) {
  return {{"inputs", columns(data.inputs)}, {"targets", columns(data.targets)}};
}

// ---------------------------------------------------------------------------
// Decoders

ProductSpace space_from_json(const Json& j, const std::string& path) {
  auto sizes = counts(j, path);
  return at_path(path, [&] { return ProductSpace(std::move(sizes)); });
}

TabularDist tabular_from_json(const Json& j, const std::string& path) {
  ProductSpace space = space_from_json(field(j, "axis_sizes", path), path + ".axis_sizes");
  auto probs = numbers(field(j, "probs", path), path + ".probs");
  return at_path(path + ".probs", [&] { return TabularDist(std::move(space), std::move(probs)); });
}

EnergyTable energy_from_json(const Json& j, const std::string& path) {
  ProductSpace space = space_from_json(field(j, "axis_sizes", path), path + ".axis_sizes");
  auto values = numbers(field(j, "values", path), path + ".values");
  return at_path(path + ".values", [&] { return EnergyTable(std::move(space), std::move(values)); });
}

ScaleMap scale_map_from_json(const Json& j, const std::string& path) {
  ProductSpace source = space_from_json(field(j, "source_axis_sizes", path), path + ".source_axis_sizes");
  ProductSpace target = space_from_json(field(j, "target_axis_sizes", path), path + ".target_axis_sizes");
  auto map = counts(field(j, "map", path), path + ".map");
  return at_path(path + ".map",
                 [&] { return ScaleMap(std::move(source), std::move(target), std::move(map)); });
}

BlockPartition partition_from_json(const Json& j, const std::string& path) {
  const auto sizes = counts(field(j, "block_sizes", path), path + ".block_sizes");
  std::vector<Index> blocks(sizes.begin(), sizes.end());
  return at_path(path + ".block_sizes", [&] { return BlockPartition(std::move(blocks)); });
}

GaussianDist gaussian_from_json(const Json& j, const std::string& path) {
  const auto mean = numbers(field(j, "mean", path), path + ".mean");
  const auto cov = numbers(field(j, "cov", path), path + ".cov");
  const auto n = static_cast<Index>(mean.size());
  if (cov.size() != mean.size() * mean.size()) fail(path + ".cov", "expected n*n entries");
  Vector mu = Eigen::Map<const Vector>(mean.data(), n);
  Matrix sigma = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      cov.data(), n, n);
  return at_path(path, [&] { return GaussianDist::from_covariance(std::move(mu), std::move(sigma)); });
}

nn::ResNetParams resnet_from_json(const Json& j, const std::string& path) {
  const auto width = static_cast<Index>(count(field(j, "width", path), path + ".width"));
  const Json& layers = field(j, "layers", path);
  if (!layers.is_array() || layers.empty()) fail(path + ".layers", "expected a nonempty array");
  std::vector<Matrix> out;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const std::string p = path + ".layers[" + std::to_string(k) + "]";
    const auto v = numbers(layers[k], p);
    if (v.size() != static_cast<std::size_t>(width * width)) fail(p, "expected width*width entries");
    out.push_back(Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        v.data(), width, width));
  }
  return at_path(path, [&] { return nn::ResNetParams(std::move(out)); });
}

nn::Dataset dataset_from_json(const Json& j, const std::string& path) {
  nn::Dataset out;
  out.inputs = matrix_from_columns(field(j, "inputs", path), path + ".inputs");
  out.targets = matrix_from_columns(field(j, "targets", path), path + ".targets");
  if (out.inputs.rows() != out.targets.rows() || out.inputs.cols() != out.targets.cols()) {
    fail(path, "inputs and targets differ in shape");
  }
  return out;
}

}  // namespace msent::io
