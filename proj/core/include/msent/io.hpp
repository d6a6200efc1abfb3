#pragma once

// JSON encodings of the library's value types.
//
//   TabularDist   {"axis_sizes": [...], "probs":  [...]}
//   EnergyTable   {"axis_sizes": [...], "values": [...]}
//   ScaleMap      {"source_axis_sizes": [...], "target_axis_sizes": [...], "map": [...]}
//   GaussianDist  {"mean": [...], "cov": [...row-major...], "block_sizes": [...]}
//   ResNetParams  {"width": m, "layers": [[...row-major...], ...]}
//   Dataset       {"inputs": [[x_1], ...], "targets": [[y_1], ...]}
//
// Decoders throw Error(InvalidConfig) naming the JSON path of the bad field.

#include <string>

#include <nlohmann/json.hpp>

#include "msent/error.hpp"
#include "msent/gaussian.hpp"
#include "msent/nn.hpp"
#include "msent/tabular.hpp"

namespace msent::io {

using Json = nlohmann::json;

Json to_json(const TabularDist& p);
Json to_json(const EnergyTable& f);
Json to_json(const ScaleMap& t);
Json to_json(const GaussianDist& g, const BlockPartition& partition);
Json to_json(const nn::ResNetParams& params);
Json to_json(const nn::Dataset& data);

/// `path` is the location of `j` in its document, used in error messages.
ProductSpace space_from_json(const Json& j, const std::string& path);
TabularDist tabular_from_json(const Json& j, const std::string& path = "$");
EnergyTable energy_from_json(const Json& j, const std::string& path = "$");
ScaleMap scale_map_from_json(const Json& j, const std::string& path = "$");
GaussianDist gaussian_from_json(const Json& j, const std::string& path = "$");
BlockPartition partition_from_json(const Json& j, const std::string& path = "$");
nn::ResNetParams resnet_from_json(const Json& j, const std::string& path = "$");
nn::Dataset dataset_from_json(const Json& j, const std::string& path = "$");

// Typed field access with path-aware errors.
const Json& field(const Json& obj, const std::string& key, const std::string& path);
double number(const Json& j, const std::string& path);
std::size_t count(const Json& j, const std::string& path);
std::vector<double> numbers(const Json& j, const std::string& path);
std::vector<std::size_t> counts(const Json& j, const std::string& path);

/// Rethrows library errors raised while decoding as InvalidConfig at `path`.
template <class F>
auto at_path(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() == Errc::InvalidConfig) throw;
    throw Error(Errc::InvalidConfig, path + ": " + e.what());
  }
}

}  // namespace msent::io
