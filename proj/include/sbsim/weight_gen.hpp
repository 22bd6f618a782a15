#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "sbsim/layer.hpp"
#include "sbsim/tensor.hpp"

namespace sbsim {

enum class WeightDistribution {
  Uniform,  // every representable value equally likely
  Profile,  // NNZB drawn from a histogram, bit positions uniform
};

/// Uniform integer in [0, bound) by rejection, independent of the standard
/// library's distribution implementations.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound);

/// Independent seed for (seed, stream, index).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

/// One weight with exactly k nonzero magnitude bits and a random sign.
std::int32_t sample_with_nnzb(std::mt19937_64& rng, int k, Precision precision);

/// profile[k] is the relative weight of NNZB = k, k in [0, precision-1].
/// Throws ValidationError on an empty, negative, all-zero or too-long profile.
FixedTensor generate_weights(const LayerSpec& layer, std::uint64_t seed, std::size_t layer_index,
                             WeightDistribution dist, std::span<const double> profile = {});

std::vector<FixedTensor> generate_network_weights(const NetworkSpec& net, std::uint64_t seed,
                                                  WeightDistribution dist, std::span<const double> profile = {});

/// Synthetic IFM [N_IC, H_I, W_I], uniform over the layer precision.
FixedTensor generate_ifm(const LayerSpec& layer, std::uint64_t seed, std::size_t layer_index);

}  // namespace sbsim
