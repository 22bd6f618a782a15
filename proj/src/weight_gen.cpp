#include "sbsim/weight_gen.hpp"

#include <array>
#include <limits>
#include <numeric>

#include "sbsim/error.hpp"

namespace sbsim {

namespace {

constexpr std::uint64_t kWeightStream = 1;
constexpr std::uint64_t kIfmStream = 2;

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::int16_t uniform_value(std::mt19937_64& rng, Precision precision) {
  const int bits = bits_of(precision);
  const std::uint64_t raw = rng() & ((std::uint64_t{1} << bits) - 1);
  return static_cast<std::int16_t>(wrap_signed(static_cast<std::int64_t>(raw), bits));
}

}  // namespace

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  if (bound == 0) throw ValidationError("uniform_below needs a positive bound");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return splitmix(splitmix(splitmix(seed) ^ stream) + index);
}

std::int32_t sample_with_nnzb(std::mt19937_64& rng, int k, Precision precision) {
  const int bits = bits_of(precision) - 1;
  if (k < 0 || k > bits) throw ValidationError("NNZB " + std::to_string(k) + " is not representable");
  std::array<int, 16> idx{};
  std::iota(idx.begin(), idx.begin() + bits, 0);
  std::int32_t mag = 0;
  for (int j = 0; j < k; ++j) {
    const int pick = j + static_cast<int>(uniform_below(rng, std::uint64_t(bits - j)));
    std::swap(idx[j], idx[pick]);
    mag |= std::int32_t{1} << idx[j];
  }
  const bool negative = (rng() & 1u) != 0;
  return negative ? -mag : mag;
}

FixedTensor generate_weights(const LayerSpec& layer, std::uint64_t seed, std::size_t layer_index,
                             WeightDistribution dist, std::span<const double> profile) {
  std::mt19937_64 rng(derive_seed(seed, kWeightStream, layer_index));
  const auto d = layer.weight_dims();
  std::vector<std::int16_t> data(layer.weight_count());
  if (dist == WeightDistribution::Uniform) {
    for (auto& v : data) v = uniform_value(rng, layer.precision);
  } else {
    if (profile.empty() || profile.size() > std::size_t(bits_of(layer.precision)))
      throw ValidationError("NNZB profile needs 1.." + std::to_string(bits_of(layer.precision)) + " entries");
    double total = 0.0;
    for (double p : profile) {
      if (!(p >= 0.0)) throw ValidationError("NNZB profile entries must be >= 0");
      total += p;
    }
    if (!(total > 0.0)) throw ValidationError("NNZB profile has no mass");
    // Cumulative thresholds on a 2^53 grid keep sampling exact and portable.
    constexpr std::uint64_t kGrid = std::uint64_t{1} << 53;
    std::vector<std::uint64_t> cut(profile.size());
    double run = 0.0;
    for (std::size_t k = 0; k < profile.size(); ++k) {
      run += profile[k];
      cut[k] = static_cast<std::uint64_t>(run / total * double(kGrid));
    }
    cut.back() = kGrid;
    for (auto& v : data) {
      const std::uint64_t u = rng() >> 11;
      std::size_t k = 0;
      while (u >= cut[k]) ++k;
      v = static_cast<std::int16_t>(sample_with_nnzb(rng, static_cast<int>(k), layer.precision));
    }
  }
  return FixedTensor::adopt({d.begin(), d.end()}, layer.precision, std::move(data));
}

std::vector<FixedTensor> generate_network_weights(const NetworkSpec& net, std::uint64_t seed,
                                                  WeightDistribution dist, std::span<const double> profile) {
  std::vector<FixedTensor> out;
  out.reserve(net.layers.size());
  for (std::size_t i = 0; i < net.layers.size(); ++i)
    out.push_back(generate_weights(net.layers[i], seed, i, dist, profile));
  return out;
}

FixedTensor generate_ifm(const LayerSpec& layer, std::uint64_t seed, std::size_t layer_index) {
  std::mt19937_64 rng(derive_seed(seed, kIfmStream, layer_index));
  const auto d = layer.ifm_dims();
  std::vector<std::int16_t> data(d[0] * d[1] * d[2]);
  for (auto& v : data) v = uniform_value(rng, layer.precision);
  return FixedTensor::adopt({d.begin(), d.end()}, layer.precision, std::move(data));
}

}  // namespace sbsim
