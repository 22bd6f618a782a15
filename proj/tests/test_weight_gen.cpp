#include "doctest.h"
#include "oracles.hpp"
#include "sbsim/config_io.hpp"
#include "sbsim/error.hpp"
#include "sbsim/weight_file.hpp"
#include "sbsim/weight_gen.hpp"

using namespace sbsim;

namespace {

LayerSpec layer(Precision p, int n_oc, int n_ic, int k) {
  LayerSpec l;
  l.name = "g";
  l.precision = p;
  l.n_oc = n_oc;
  l.n_ic = n_ic;
  l.h_i = l.w_i = k;
  l.h_k = l.w_k = k;
  return l;
}

}  // namespace

TEST_CASE("same seed gives identical weight files") {
  const auto net = resolve_network("smoke");
  const auto a = serialize_weights(generate_network_weights(net, 42, WeightDistribution::Uniform));
  const auto b = serialize_weights(generate_network_weights(net, 42, WeightDistribution::Uniform));
  const auto c = serialize_weights(generate_network_weights(net, 43, WeightDistribution::Uniform));
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("profiled weights with all mass at k") {
  for (auto p : {Precision::Int8, Precision::Int16}) {
    for (int k = 0; k < bits_of(p); ++k) {
      std::vector<double> profile(bits_of(p), 0.0);
      profile[k] = 1.0;
      const auto w = generate_weights(layer(p, 8, 8, 3), 7, 0, WeightDistribution::Profile, profile);
      for (auto x : w.to_vector()) REQUIRE(oracle::popcount(x) == k);
    }
  }
}

TEST_CASE("profiled weights follow the histogram") {
  const std::vector<double> profile{0, 1, 0, 3};
  const auto w = generate_weights(layer(Precision::Int16, 64, 64, 5), 3, 0, WeightDistribution::Profile, profile);
  std::vector<std::size_t> hist(17, 0);
  for (auto x : w.to_vector()) ++hist[oracle::popcount(x)];
  const double n = double(w.size());
  CHECK(hist[1] / n == doctest::Approx(0.25).epsilon(0.05));
  CHECK(hist[3] / n == doctest::Approx(0.75).epsilon(0.05));
  CHECK(hist[0] + hist[2] == 0);
}

TEST_CASE("uniform 16-bit weights average 7.5 nonzero bits") {
  const auto w = generate_weights(layer(Precision::Int16, 100, 1000, 1), 1, 0, WeightDistribution::Uniform);
  REQUIRE(w.size() == 100000);
  double sum = 0;
  for (auto x : w.to_vector()) sum += oracle::popcount(x);
  CHECK(sum / double(w.size()) == doctest::Approx(7.5).epsilon(0.1 / 7.5));
}

TEST_CASE("bad profiles are rejected") {
  const auto l = layer(Precision::Int8, 2, 2, 1);
  const std::vector<double> empty, negative{1, -1}, zero{0, 0}, long_profile(9, 1.0);
  CHECK_THROWS_AS(generate_weights(l, 1, 0, WeightDistribution::Profile, empty), ValidationError);
  CHECK_THROWS_AS(generate_weights(l, 1, 0, WeightDistribution::Profile, negative), ValidationError);
  CHECK_THROWS_AS(generate_weights(l, 1, 0, WeightDistribution::Profile, zero), ValidationError);
  CHECK_THROWS_AS(generate_weights(l, 1, 0, WeightDistribution::Profile, long_profile), ValidationError);
}

TEST_CASE("generated IFMs are deterministic and in range") {
  auto l = layer(Precision::Int8, 2, 3, 3);
  l.h_i = l.w_i = 9;
  const auto a = generate_ifm(l, 5, 1);
  CHECK(a == generate_ifm(l, 5, 1));
  CHECK_FALSE(a == generate_ifm(l, 5, 2));
  CHECK(a.dims() == std::vector<std::size_t>{3, 9, 9});
  CHECK(a.bitwidth() == Precision::Int8);
}

TEST_CASE("uniform_below stays in range") {
  std::mt19937_64 rng(1);
  std::vector<int> seen(7, 0);
  for (int k = 0; k < 7000; ++k) ++seen[uniform_below(rng, 7)];
  for (int s : seen) CHECK(s > 800);
  CHECK_THROWS_AS(uniform_below(rng, 0), ValidationError);
}
