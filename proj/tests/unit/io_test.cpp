#include <gtest/gtest.h>

#include "msent/error.hpp"
#include "msent/io.hpp"
#include "support.hpp"

namespace msent::io {
namespace {

using msent::testing::random_dist;
using msent::testing::random_gaussian;
using msent::testing::rng_for;

Errc code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::InvalidArgument;
}

TEST(Io, TabularRoundTrip) {
  auto rng = rng_for(601);
  const TabularDist p = random_dist(ProductSpace({2, 3}), rng);
  const TabularDist back = tabular_from_json(Json::parse(to_json(p).dump()));
  EXPECT_EQ(back.space(), p.space());
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_EQ(back[i], p[i]);
}

TEST(Io, ScaleMapAndEnergyRoundTrip) {
  const ProductSpace s({2, 2});
  const ScaleMap t = ScaleMap::decimation(s);
  const ScaleMap back = scale_map_from_json(to_json(t));
  EXPECT_EQ(back.target(), t.target());
  EXPECT_TRUE(std::equal(back.map().begin(), back.map().end(), t.map().begin()));
  const EnergyTable f(s, {1.0, -2.0, 0.5, 3.0});
  EXPECT_EQ(energy_from_json(to_json(f))[1], -2.0);
}

TEST(Io, GaussianRoundTrip) {
  auto rng = rng_for(602);
  const GaussianDist g = random_gaussian(3, rng);
  const BlockPartition part({1, 2});
  const Json j = Json::parse(to_json(g, part).dump());
  const GaussianDist back = gaussian_from_json(j);
  EXPECT_EQ(back.mean(), g.mean());
  EXPECT_EQ(back.covariance(), g.covariance());
  EXPECT_EQ(partition_from_json(j), part);
}

TEST(Io, NetworkAndDatasetRoundTrip) {
  Matrix a(2, 2), b(2, 2);
  a << 1, 2, 3, 4;
  b << -1, 0.5, 0, 2;
  const nn::ResNetParams p({a, b});
  const nn::ResNetParams back = resnet_from_json(Json::parse(to_json(p).dump()));
  EXPECT_EQ(back.flatten(), p.flatten());
  const nn::Dataset d{a, b};
  const nn::Dataset dback = dataset_from_json(Json::parse(to_json(d).dump()));
  EXPECT_EQ(dback.inputs, a);
  EXPECT_EQ(dback.targets, b);
}

TEST(Io, ErrorsNameTheFieldPath) {
  const Json bad = Json::parse(R"({"axis_sizes": [2, 2], "probs": [0.3, 0.2, 0.2, 0.2]})");
  try {
    tabular_from_json(bad, "$.reference");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InvalidConfig);
    EXPECT_NE(std::string(e.what()).find("$.reference"), std::string::npos);
  }
  EXPECT_EQ(code_of([] { tabular_from_json(Json::parse(R"({"axis_sizes": [2]})")); }), Errc::InvalidConfig);
  EXPECT_EQ(code_of([] { numbers(Json::parse(R"([1, "x"])"), "$.v"); }), Errc::InvalidConfig);
  EXPECT_EQ(code_of([] { count(Json::parse("-3"), "$.n"); }), Errc::InvalidConfig);
  EXPECT_EQ(code_of([] { count(Json::parse("2.5"), "$.n"); }), Errc::InvalidConfig);
}

}  // namespace
}  // namespace msent::io
