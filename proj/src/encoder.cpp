#include "sbsim/encoder.hpp"

#include <algorithm>
#include <string>

#include "sbsim/error.hpp"
#include "sbsim/io.hpp"

namespace sbsim {

namespace {

void check_n_max(Precision precision, int n_max) {
  if (n_max < 1 || n_max > bits_of(precision))
    throw ValidationError("n_max must be in [1, " + std::to_string(bits_of(precision)) + "]");
}

// Invariants shared by decode paths; returns the decoded value.
std::int32_t checked_decode(bool sign, std::uint16_t bitmap, std::span<const std::uint8_t> pos,
                            Precision precision) {
  const int n = static_cast<int>(pos.size());
  if (n < kMaxSlots && (bitmap >> n) != 0) throw FormatError("bitmap has bits beyond n_max");
  std::int64_t mag = 0;
  int last = bits_of(precision);
  for (int k = 0; k < n; ++k) {
    if ((bitmap >> k) & 1u) {
      if (pos[k] >= last) throw FormatError("valid bit positions must be strictly decreasing");
      last = pos[k];
      mag += std::int64_t{1} << pos[k];
    } else if (pos[k] != 0) {
      throw FormatError("invalid slot carries a nonzero position");
    }
  }
  if (sign && mag == 0) throw FormatError("zero weight with negative sign");
  const std::int64_t v = sign ? -mag : mag;
  if (!fits_signed(v, bits_of(precision))) throw FormatError("decoded weight exceeds precision");
  return static_cast<std::int32_t>(v);
}

}  // namespace

int bits_per_weight(Precision precision, int n_max) {
  check_n_max(precision, n_max);
  return 1 + n_max + n_max * position_width(precision);
}

int positions_per_word(Precision precision) { return precision == Precision::Int16 ? 4 : 5; }

EncodedWeight encode_weight(std::int32_t w, Precision precision, int n_max) {
  check_n_max(precision, n_max);
  if (!fits_signed(w, bits_of(precision))) throw ValidationError("weight does not fit precision");
  if (nnzb(w) > n_max) throw ValidationError("weight not quantized to n_max");
  EncodedWeight e;
  e.sign = w < 0;
  e.n_max = static_cast<std::uint8_t>(n_max);
  std::uint64_t mag = magnitude(w);
  int slot = 0;
  while (mag != 0) {
    const int top = 63 - std::countl_zero(mag);
    e.positions[slot] = static_cast<std::uint8_t>(top);
    e.bitmap |= static_cast<std::uint16_t>(1u << slot);
    mag &= ~(std::uint64_t{1} << top);
    ++slot;
  }
  return e;
}

std::int32_t decode_weight(const EncodedWeight& e) {
  std::int64_t mag = 0;
  for (int k = 0; k < e.n_max; ++k) {
    if (e.valid(k)) mag += std::int64_t{1} << e.positions[k];
  }
  return static_cast<std::int32_t>(e.sign ? -mag : mag);
}

EncodedLayer::EncodedLayer(Precision precision, int n_max, std::array<std::size_t, 4> dims)
    : precision_(precision), n_max_(n_max), dims_(dims) {
  check_n_max(precision, n_max);
  if (dims[0] * dims[1] * dims[2] * dims[3] != 0) throw ValidationError("non-empty dims need weight data");
}

EncodedLayer::EncodedLayer(Precision precision, int n_max, std::array<std::size_t, 4> dims,
                           std::vector<std::uint8_t> signs, std::vector<std::uint16_t> bitmaps,
                           std::vector<std::uint8_t> positions)
    : precision_(precision),
      n_max_(n_max),
      dims_(dims),
      signs_(std::move(signs)),
      bitmaps_(std::move(bitmaps)),
      positions_(std::move(positions)) {
  check_n_max(precision, n_max);
  const std::size_t n = dims[0] * dims[1] * dims[2] * dims[3];
  if (signs_.size() != n || bitmaps_.size() != n || positions_.size() != n * std::size_t(n_max))
    throw ValidationError("encoded layer streams do not match dims");
  for (std::size_t i = 0; i < n; ++i) checked_decode(signs_[i] != 0, bitmaps_[i], this->positions(i), precision_);
}

EncodedWeight EncodedLayer::weight(std::size_t i) const {
  EncodedWeight e;
  e.sign = sign(i);
  e.n_max = static_cast<std::uint8_t>(n_max_);
  e.bitmap = bitmaps_[i];
  auto p = positions(i);
  std::copy(p.begin(), p.end(), e.positions.begin());
  return e;
}

std::int32_t EncodedLayer::decoded(std::size_t i) const {
  std::int32_t mag = 0;
  const auto p = positions(i);
  const auto bm = bitmaps_[i];
  for (int k = 0; k < n_max_; ++k) {
    if ((bm >> k) & 1u) mag += std::int32_t{1} << p[k];
  }
  return signs_[i] ? -mag : mag;
}

EncodedLayer encode_layer(const FixedTensor& weights, int n_max) {
  const auto& d = weights.dims();
  if (d.size() != 4) throw ValidationError("weight tensor must be [Co, Ci, Hk, Wk]");
  const auto prec = weights.bitwidth();
  check_n_max(prec, n_max);
  const auto src = weights.values();
  std::vector<std::uint8_t> signs(src.size());
  std::vector<std::uint16_t> bitmaps(src.size());
  std::vector<std::uint8_t> positions(src.size() * std::size_t(n_max), 0);
  for (std::size_t i = 0; i < src.size(); ++i) {
    const auto e = encode_weight(src[i], prec, n_max);
    signs[i] = e.sign;
    bitmaps[i] = e.bitmap;
    std::copy_n(e.positions.begin(), n_max, positions.begin() + i * std::size_t(n_max));
  }
  return EncodedLayer(prec, n_max, {d[0], d[1], d[2], d[3]}, std::move(signs), std::move(bitmaps),
                      std::move(positions));
}

FixedTensor decode_layer(const EncodedLayer& layer) {
  std::vector<std::int16_t> out(layer.weight_count());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<std::int16_t>(layer.decoded(i));
  const auto& d = layer.dims();
  return FixedTensor::adopt({d.begin(), d.end()}, layer.precision(), std::move(out));
}

StreamSizes stream_sizes(const LayerMeta& meta) {
  const std::size_t n = meta.weight_count();
  const std::size_t slots = n * std::size_t(meta.n_max);
  return {ceil_div(n, 16), ceil_div(slots, 16), ceil_div(slots, std::size_t(positions_per_word(meta.precision)))};
}

WeightBufferImage pack_layer(const EncodedLayer& layer) {
  const LayerMeta meta{layer.precision(), layer.n_max(), layer.dims()};
  const auto sizes = stream_sizes(meta);
  WeightBufferImage img;
  img.sign_words.assign(sizes.sign_words, 0);
  img.bitmap_words.assign(sizes.bitmap_words, 0);
  img.position_words.assign(sizes.position_words, 0);

  const std::size_t n_max = std::size_t(layer.n_max());
  const std::size_t per_word = std::size_t(positions_per_word(layer.precision()));
  const int field = position_width(layer.precision());
  for (std::size_t k = 0; k < layer.weight_count(); ++k) {
    if (layer.sign(k)) img.sign_words[k / 16] |= static_cast<std::uint16_t>(1u << (k % 16));
    const auto bm = layer.bitmap(k);
    const auto pos = layer.positions(k);
    for (std::size_t j = 0; j < n_max; ++j) {
      const std::size_t q = k * n_max + j;
      if ((bm >> j) & 1u) img.bitmap_words[q / 16] |= static_cast<std::uint16_t>(1u << (q % 16));
      img.position_words[q / per_word] |= static_cast<std::uint16_t>(pos[j] << (field * (q % per_word)));
    }
  }
  return img;
}

EncodedLayer unpack_layer(const WeightBufferImage& image, const LayerMeta& meta) {
  check_n_max(meta.precision, meta.n_max);
  const auto sizes = stream_sizes(meta);
  if (image.sign_words.size() < sizes.sign_words || image.bitmap_words.size() < sizes.bitmap_words ||
      image.position_words.size() < sizes.position_words)
    throw FormatError("buffer underrun");
  if (image.sign_words.size() > sizes.sign_words || image.bitmap_words.size() > sizes.bitmap_words ||
      image.position_words.size() > sizes.position_words)
    throw FormatError("image larger than layer metadata");

  const std::size_t n = meta.weight_count();
  const std::size_t n_max = std::size_t(meta.n_max);
  const std::size_t per_word = std::size_t(positions_per_word(meta.precision));
  const int field = position_width(meta.precision);
  const std::uint16_t field_mask = static_cast<std::uint16_t>((1u << field) - 1);

  std::vector<std::uint8_t> signs(n);
  std::vector<std::uint16_t> bitmaps(n, 0);
  std::vector<std::uint8_t> positions(n * n_max);
  for (std::size_t k = 0; k < n; ++k) {
    signs[k] = (image.sign_words[k / 16] >> (k % 16)) & 1u;
    for (std::size_t j = 0; j < n_max; ++j) {
      const std::size_t q = k * n_max + j;
      if ((image.bitmap_words[q / 16] >> (q % 16)) & 1u) bitmaps[k] |= static_cast<std::uint16_t>(1u << j);
      positions[q] = static_cast<std::uint8_t>((image.position_words[q / per_word] >> (field * (q % per_word))) &
                                               field_mask);
    }
  }
  try {
    return EncodedLayer(meta.precision, meta.n_max, meta.dims, std::move(signs), std::move(bitmaps),
                        std::move(positions));
  } catch (const ValidationError& e) {
    throw FormatError(e.what());
  }
}

namespace {
constexpr std::string_view kEncodedMagic = "SBEL";
constexpr std::uint16_t kEncodedVersion = 1;
}  // namespace

std::vector<std::uint8_t> serialize_encoded_layer(const EncodedLayer& layer) {
  const auto img = pack_layer(layer);
  ByteWriter w;
  w.data().reserve(36 + 2 * img.word_count());
  w.bytes(kEncodedMagic);
  w.u16(kEncodedVersion);
  w.u8(static_cast<std::uint8_t>(bits_of(layer.precision())));
  w.u8(static_cast<std::uint8_t>(layer.n_max()));
  for (auto d : layer.dims()) w.u32(static_cast<std::uint32_t>(d));
  w.u32(static_cast<std::uint32_t>(img.sign_words.size()));
  w.u32(static_cast<std::uint32_t>(img.bitmap_words.size()));
  w.u32(static_cast<std::uint32_t>(img.position_words.size()));
  for (auto s : {&img.sign_words, &img.bitmap_words, &img.position_words})
    for (auto word : *s) w.u16(word);
  return std::move(w.data());
}

EncodedLayer deserialize_encoded_layer(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (r.bytes(4) != kEncodedMagic) throw FormatError("not an encoded layer file (bad magic)");
  if (r.u16() != kEncodedVersion) throw FormatError("unsupported encoded layer version");
  LayerMeta meta;
  const int bits = r.u8();
  if (bits != 8 && bits != 16) throw FormatError("bad precision in encoded layer header");
  meta.precision = bits == 8 ? Precision::Int8 : Precision::Int16;
  meta.n_max = r.u8();
  for (auto& d : meta.dims) d = r.u32();
  WeightBufferImage img;
  const std::uint32_t counts[3] = {r.u32(), r.u32(), r.u32()};
  std::vector<std::uint16_t>* streams[3] = {&img.sign_words, &img.bitmap_words, &img.position_words};
  for (int s = 0; s < 3; ++s) {
    if (r.remaining() < std::size_t(counts[s]) * 2) throw FormatError("buffer underrun");
    streams[s]->resize(counts[s]);
    for (auto& word : *streams[s]) word = r.u16();
  }
  if (r.remaining() != 0) throw FormatError("encoded layer file has trailing bytes");
  try {
    return unpack_layer(img, meta);
  } catch (const ValidationError& e) {
    throw FormatError(e.what());
  }
}

void write_encoded_layer(const std::filesystem::path& path, const EncodedLayer& layer) {
  write_file_atomic(path, serialize_encoded_layer(layer));
}

EncodedLayer read_encoded_layer(const std::filesystem::path& path) {
  return deserialize_encoded_layer(read_file_bytes(path));
}

}  // namespace sbsim
