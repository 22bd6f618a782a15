#pragma once

#include <cstdint>

#include "sbsim/bits.hpp"
#include "sbsim/encoder.hpp"
#include "sbsim/layer.hpp"
#include "sbsim/tensor.hpp"

namespace sbsim {

/// Fixed-width signed accumulator with two's-complement wrap.
///
/// wrap_balance tracks how many times the value crossed the range, signed, so
/// value + wrap_balance * 2^bits always equals the exact wide sum.
class Psum {
 public:
  explicit Psum(int bits = 32) : bits_(bits) {}

  void add(std::int64_t v);

  std::int64_t value() const { return value_; }
  int bits() const { return bits_; }
  std::uint64_t overflow_count() const { return overflows_; }
  std::int64_t wrap_balance() const { return balance_; }

 private:
  int bits_;
  std::int64_t value_ = 0;
  std::uint64_t overflows_ = 0;
  std::int64_t balance_ = 0;
};

struct MacResult {
  std::int64_t value = 0;
  int cycles = 0;
};

/// Dense bit-serial multiply: walks every magnitude bit of w.
MacResult bitserial_mac(std::int32_t i, std::int32_t w, Precision precision);

/// Sparse bit-serial multiply over the encoded slots; always n_max steps.
MacResult sparse_mac(std::int32_t i, const EncodedWeight& e, int n_max);

/// Psum to OFM element: arithmetic right shift by ofm_shift, then wrap (or
/// clamp, when the layer saturates) to the layer precision.
std::int32_t write_out(std::int64_t psum, const LayerSpec& layer);

struct WrapStats {
  // Output elements whose exact sum did not fit the Psum width.
  std::uint64_t psum_wrapped = 0;
  // Output elements altered by narrowing to the layer precision.
  std::uint64_t ofm_wrapped = 0;
};

struct ConvOutput {
  FixedTensor ofm;
  WrapStats wraps;
};

/// Integer convolution (or GEMV for FC) with exact wide accumulation, wrapped
/// to the Psum width and written out at layer precision.
///
/// ifm is [N_IC, H_I, W_I]; w is [N_OC, N_IC, H_K, W_K]; result is
/// [N_OC, H_O, W_O] before ReLU and pooling.
ConvOutput conv_golden(const FixedTensor& ifm, const FixedTensor& w, const LayerSpec& layer);

/// Same contract as conv_golden, evaluated with sparse_mac over each encoded
/// weight and a per-output Psum register.
FixedTensor sparse_conv_golden(const FixedTensor& ifm, const EncodedLayer& enc, const LayerSpec& layer);

/// ReLU (when enabled) then max-pooling (when configured).
FixedTensor relu_pool(const FixedTensor& ofm, const LayerSpec& layer);

/// Throws ValidationError unless ifm and weight shapes match the layer.
void check_conv_shapes(const FixedTensor& ifm, std::span<const std::size_t> weight_dims, Precision weight_precision,
                       const LayerSpec& layer);

}  // namespace sbsim
