#include "sbsim/weight_file.hpp"

#include "sbsim/error.hpp"
#include "sbsim/io.hpp"

namespace sbsim {

namespace {
constexpr std::string_view kMagic = "SBWF";
}

std::vector<std::uint8_t> serialize_weights(std::span<const FixedTensor> layers) {
  ByteWriter w;
  w.bytes(kMagic);
  w.u32(kWeightFileVersion);
  w.u32(static_cast<std::uint32_t>(layers.size()));
  w.u32(0);
  for (const auto& t : layers) {
    const bool wide = t.bitwidth() == Precision::Int16;
    for (auto v : t.values()) {
      if (wide) {
        w.u16(static_cast<std::uint16_t>(v));
      } else {
        w.u8(static_cast<std::uint8_t>(static_cast<std::int8_t>(v)));
      }
    }
  }
  return std::move(w.data());
}

std::vector<FixedTensor> deserialize_weights(std::span<const std::uint8_t> bytes, const NetworkSpec& net) {
  ByteReader r(bytes);
  if (r.remaining() < 16) throw FormatError("weight file shorter than its header");
  if (r.bytes(4) != kMagic) throw FormatError("not a weight file (bad magic)");
  if (auto v = r.u32(); v != kWeightFileVersion) throw FormatError("unsupported weight file version " + std::to_string(v));
  const auto count = r.u32();
  r.u32();
  if (count != net.layers.size()) {
    throw FormatError("weight file has " + std::to_string(count) + " layers, network has " +
                      std::to_string(net.layers.size()));
  }
  std::vector<FixedTensor> out;
  out.reserve(count);
  for (const auto& l : net.layers) {
    const auto dims = l.weight_dims();
    const auto n = l.weight_count();
    const bool wide = l.precision == Precision::Int16;
    if (r.remaining() < n * (wide ? 2 : 1)) throw FormatError("weight file truncated in layer '" + l.name + "'");
    std::vector<std::int16_t> data(n);
    for (auto& v : data) {
      v = wide ? static_cast<std::int16_t>(r.u16()) : static_cast<std::int8_t>(r.u8());
    }
    out.push_back(FixedTensor::adopt({dims.begin(), dims.end()}, l.precision, std::move(data)));
  }
  if (r.remaining() != 0) throw FormatError("weight file has trailing bytes");
  return out;
}

void write_weight_file(const std::filesystem::path& path, std::span<const FixedTensor> layers) {
  write_file_atomic(path, serialize_weights(layers));
}

std::vector<FixedTensor> read_weight_file(const std::filesystem::path& path, const NetworkSpec& net) {
  return deserialize_weights(read_file_bytes(path), net);
}

}  // namespace sbsim
