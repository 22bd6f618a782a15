#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "sbsim/bits.hpp"
#include "sbsim/tensor.hpp"

namespace sbsim {

inline constexpr int kMaxSlots = 16;

/// Storage per encoded weight: sign + bitmap + n_max bit positions.
int bits_per_weight(Precision precision, int n_max);

/// One weight in sign / bit-position / bitmap form.
///
/// positions[0..n_max) lists set-bit indices of |w|, most significant first.
/// Bit k of `bitmap` marks positions[k] valid; invalid slots hold 0.
struct EncodedWeight {
  bool sign = false;
  std::uint8_t n_max = 0;
  std::uint16_t bitmap = 0;
  std::array<std::uint8_t, kMaxSlots> positions{};

  bool valid(int slot) const { return (bitmap >> slot) & 1u; }
  int valid_count() const { return std::popcount(bitmap); }
  bool operator==(const EncodedWeight&) const = default;
};

/// Throws ValidationError("weight not quantized to n_max") if nnzb(w) > n_max.
EncodedWeight encode_weight(std::int32_t w, Precision precision, int n_max);
std::int32_t decode_weight(const EncodedWeight& e);

/// Encoded weights of one layer in [Co, Ci, Hk, Wk] order.
///
/// Stored structure-of-arrays so full-size FC layers stay compact.
class EncodedLayer {
 public:
  EncodedLayer() = default;
  EncodedLayer(Precision precision, int n_max, std::array<std::size_t, 4> dims);

  /// Validates every weight's invariants against precision and n_max.
  EncodedLayer(Precision precision, int n_max, std::array<std::size_t, 4> dims,
               std::vector<std::uint8_t> signs, std::vector<std::uint16_t> bitmaps,
               std::vector<std::uint8_t> positions);

  Precision precision() const { return precision_; }
  int n_max() const { return n_max_; }
  const std::array<std::size_t, 4>& dims() const { return dims_; }
  std::size_t weight_count() const { return signs_.size(); }
  std::uint64_t total_bits() const {
    return std::uint64_t(weight_count()) * std::uint64_t(bits_per_weight(precision_, n_max_));
  }

  bool sign(std::size_t i) const { return signs_[i] != 0; }
  std::uint16_t bitmap(std::size_t i) const { return bitmaps_[i]; }
  std::span<const std::uint8_t> positions(std::size_t i) const {
    return {positions_.data() + i * std::size_t(n_max_), std::size_t(n_max_)};
  }
  int valid_count(std::size_t i) const { return std::popcount(bitmaps_[i]); }
  EncodedWeight weight(std::size_t i) const;
  std::int32_t decoded(std::size_t i) const;

  bool operator==(const EncodedLayer&) const = default;

 private:
  Precision precision_ = Precision::Int16;
  int n_max_ = 1;
  std::array<std::size_t, 4> dims_{0, 0, 0, 0};
  std::vector<std::uint8_t> signs_;
  std::vector<std::uint16_t> bitmaps_;
  std::vector<std::uint8_t> positions_;
};

/// Encodes an already-quantized 4-D weight tensor.
EncodedLayer encode_layer(const FixedTensor& weights, int n_max);
FixedTensor decode_layer(const EncodedLayer& layer);

/// Packed 16-bit word streams as laid out in the weight buffer.
///
/// Signs: 16 per word, weight k at bit k%16 of word k/16.
/// Bitmaps: slot q = k*n_max + j at bit q%16 of word q/16.
/// Positions: slot q at field q%P of word q/P, P = 4 (4-bit fields) at
/// 16-bit precision or 5 (3-bit fields, bit 15 zero) at 8-bit.
struct WeightBufferImage {
  std::vector<std::uint16_t> sign_words;
  std::vector<std::uint16_t> bitmap_words;
  std::vector<std::uint16_t> position_words;

  std::size_t word_count() const { return sign_words.size() + bitmap_words.size() + position_words.size(); }
  bool operator==(const WeightBufferImage&) const = default;
};

struct LayerMeta {
  Precision precision = Precision::Int16;
  int n_max = 1;
  std::array<std::size_t, 4> dims{0, 0, 0, 0};

  std::size_t weight_count() const { return dims[0] * dims[1] * dims[2] * dims[3]; }
};

int positions_per_word(Precision precision);

struct StreamSizes {
  std::size_t sign_words = 0;
  std::size_t bitmap_words = 0;
  std::size_t position_words = 0;
};
StreamSizes stream_sizes(const LayerMeta& meta);

WeightBufferImage pack_layer(const EncodedLayer& layer);

/// Inverse of pack_layer. Throws FormatError("buffer underrun") when a stream
/// is shorter than the metadata requires.
EncodedLayer unpack_layer(const WeightBufferImage& image, const LayerMeta& meta);

// Encoded-layer file (little-endian):
//   0  "SBEL"  4  u16 version = 1  6  u8 precision bits  7  u8 n_max
//   8  u32 dims[4] (Co, Ci, Hk, Wk)
//  24  u32 sign words, u32 bitmap words, u32 position words
//  36  sign stream, bitmap stream, position stream (u16 each)
std::vector<std::uint8_t> serialize_encoded_layer(const EncodedLayer& layer);
EncodedLayer deserialize_encoded_layer(std::span<const std::uint8_t> bytes);
void write_encoded_layer(const std::filesystem::path& path, const EncodedLayer& layer);
EncodedLayer read_encoded_layer(const std::filesystem::path& path);

}  // namespace sbsim
