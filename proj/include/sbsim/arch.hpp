#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sbsim/bits.hpp"

namespace sbsim {

/// Hardware parameters of the accelerator model.
///
/// Defaults describe a 32x32 array at 1 GHz with 8x8 IFM tiles. Each PE row
/// owns an I&W buffer of 2x1K + 2x256 16-bit words, and each column owns
/// two 64-word Psum register files for 32-bit partial sums.
struct ArchConfig {
  int n_pe = 32;
  int w_is = 8;
  int h_is = 8;
  std::int64_t ifm_weight_buffer_words = 32 * 2560;
  std::int64_t output_buffer_words = 32 * 128;
  double core_power_mw_16b = 689.0;
  double core_power_mw_8b = 729.0;
  // Placeholder; there is no published per-bit DRAM energy for this design.
  double dram_energy_pj_per_bit = 20.0;
  double clock_hz = 1.0e9;
  // One array-wide buffer word (n_pe x 16 bits) per cycle from DRAM.
  int dram_bits_per_cycle = 512;
  double area_mm2 = 4.99;

  double core_power_mw(Precision p) const {
    return p == Precision::Int16 ? core_power_mw_16b : core_power_mw_8b;
  }

  // Per-row share of one ping-pong half of the I&W buffer.
  std::int64_t row_buffer_half_words() const;

  // Problems with the config itself; empty when valid.
  std::vector<std::string> check() const;
};

}  // namespace sbsim
