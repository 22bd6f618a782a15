#pragma once

#include <bit>
#include <cstdint>

namespace sbsim {

// Operand widths the datapath supports.
enum class Precision : std::uint8_t { Int8 = 8, Int16 = 16 };

constexpr int bits_of(Precision p) { return static_cast<int>(p); }

// Bit-position field width in the weight encoding.
constexpr int position_width(Precision p) { return p == Precision::Int16 ? 4 : 3; }

// Partial-sum register width: 32 bits in 16-bit mode, 16 bits per lane in 8-bit mode.
constexpr int psum_bits(Precision p) { return p == Precision::Int16 ? 32 : 16; }

// 8-bit mode splits each PE into two independent lanes.
constexpr int lanes_of(Precision p) { return p == Precision::Int16 ? 1 : 2; }

constexpr std::int64_t min_signed(int bits) { return -(std::int64_t{1} << (bits - 1)); }
constexpr std::int64_t max_signed(int bits) { return (std::int64_t{1} << (bits - 1)) - 1; }

constexpr bool fits_signed(std::int64_t v, int bits) {
  return v >= min_signed(bits) && v <= max_signed(bits);
}

constexpr std::uint64_t magnitude(std::int64_t w) {
  return w < 0 ? std::uint64_t(0) - static_cast<std::uint64_t>(w) : static_cast<std::uint64_t>(w);
}

// Number of nonzero bits in the magnitude of w (sign excluded).
constexpr int nnzb(std::int64_t w) { return std::popcount(magnitude(w)); }

// Two's-complement wrap of v into a signed field `bits` wide (keeps the low bits).
constexpr std::int64_t wrap_signed(std::int64_t v, int bits) {
  const std::uint64_t mask = bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
  const std::uint64_t low = static_cast<std::uint64_t>(v) & mask;
  const std::uint64_t sign = std::uint64_t{1} << (bits - 1);
  return (low & sign) ? static_cast<std::int64_t>(low | ~mask) : static_cast<std::int64_t>(low);
}

constexpr std::int64_t saturate_signed(std::int64_t v, int bits) {
  if (v > max_signed(bits)) return max_signed(bits);
  if (v < min_signed(bits)) return min_signed(bits);
  return v;
}

constexpr std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

}  // namespace sbsim
