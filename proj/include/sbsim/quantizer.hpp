#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "sbsim/bits.hpp"
#include "sbsim/tensor.hpp"

namespace sbsim {

/// Keeps the `n_max` most significant set bits of |w| and clears the rest.
/// The sign is preserved and the result never exceeds |w| in magnitude.
std::int32_t quantize_weight(std::int32_t w, int n_max);

struct QuantStats {
  int layer = 0;
  int n_max = 0;
  // Index k counts weights with k nonzero magnitude bits.
  std::vector<std::uint64_t> hist_before;
  std::vector<std::uint64_t> hist_after;
  double mse = 0.0;
  std::int64_t max_abs_error = 0;
  double fraction_modified = 0.0;
};

struct QuantizedTensor {
  FixedTensor tensor;
  QuantStats stats;
};

QuantizedTensor quantize_tensor(const FixedTensor& weights, int n_max, int layer_index = 0);

/// Count of magnitudes representable with at most n_max set bits out of N:
/// sum_{i=0}^{n_max} C(N, i). Requires 0 <= n_max <= N <= 32.
std::uint64_t numeric_range(int n_max, int n_bits);

// Called once per sweep step with that step's stats and quantized tensor;
// an external retraining loop can hook in here.
using SweepHook = std::function<void(const QuantStats&, const FixedTensor&)>;

std::vector<QuantStats> sweep_nnzb(const FixedTensor& weights, std::span<const int> n_values,
                                   const SweepHook& hook = {});

}  // namespace sbsim
