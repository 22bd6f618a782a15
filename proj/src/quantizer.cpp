#include "sbsim/quantizer.hpp"

#include <algorithm>
#include <cstdlib>

#include "sbsim/error.hpp"

namespace sbsim {

std::int32_t quantize_weight(std::int32_t w, int n_max) {
  if (n_max < 1) throw ValidationError("n_max must be >= 1");
  std::uint64_t mag = magnitude(w);
  std::uint64_t kept = 0;
  for (int i = 0; i < n_max && mag != 0; ++i) {
    const std::uint64_t top = std::uint64_t{1} << (63 - std::countl_zero(mag));
    kept |= top;
    mag &= ~top;
  }
  const auto k = static_cast<std::int64_t>(kept);
  return static_cast<std::int32_t>(w < 0 ? -k : k);
}

QuantizedTensor quantize_tensor(const FixedTensor& weights, int n_max, int layer_index) {
  if (n_max < 1) throw ValidationError("n_max must be >= 1");
  const int bins = bits_of(weights.bitwidth()) + 1;
  QuantStats st;
  st.layer = layer_index;
  st.n_max = n_max;
  st.hist_before.assign(bins, 0);
  st.hist_after.assign(bins, 0);

  auto src = weights.values();
  std::vector<std::int16_t> out(src.size());
  double sq = 0.0;
  std::uint64_t modified = 0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    const std::int32_t w = src[i];
    const std::int32_t q = quantize_weight(w, n_max);
    out[i] = static_cast<std::int16_t>(q);
    ++st.hist_before[nnzb(w)];
    ++st.hist_after[nnzb(q)];
    const std::int64_t err = std::int64_t(w) - q;
    if (err != 0) {
      ++modified;
      sq += double(err) * double(err);
      st.max_abs_error = std::max<std::int64_t>(st.max_abs_error, std::llabs(err));
    }
  }
  if (!src.empty()) {
    st.mse = sq / double(src.size());
    st.fraction_modified = double(modified) / double(src.size());
  }
  return {FixedTensor::adopt(weights.dims(), weights.bitwidth(), std::move(out)), std::move(st)};
}

std::uint64_t numeric_range(int n_max, int n_bits) {
  if (n_bits < 0 || n_bits > 32 || n_max < 0 || n_max > n_bits)
    throw ValidationError("numeric_range requires 0 <= n_max <= N <= 32");
  std::uint64_t total = 0;
  std::uint64_t c = 1;  // C(N, 0)
  for (int i = 0; i <= n_max; ++i) {
    total += c;
    c = c * std::uint64_t(n_bits - i) / std::uint64_t(i + 1);
  }
  return total;
}

std::vector<QuantStats> sweep_nnzb(const FixedTensor& weights, std::span<const int> n_values,
                                   const SweepHook& hook) {
  if (n_values.empty()) throw ValidationError("sweep needs at least one n_max value");
  std::vector<QuantStats> out;
  out.reserve(n_values.size());
  for (int n : n_values) {
    auto q = quantize_tensor(weights, n);
    if (hook) hook(q.stats, q.tensor);
    out.push_back(std::move(q.stats));
  }
  return out;
}

}  // namespace sbsim
