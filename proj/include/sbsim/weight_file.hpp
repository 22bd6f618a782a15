#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "sbsim/layer.hpp"
#include "sbsim/tensor.hpp"

namespace sbsim {

// Weight file layout (little-endian):
//   0  "SBWF"            magic
//   4  u32 version = 1
//   8  u32 layer count
//  12  u32 reserved = 0
//  16  per layer, [Co, Ci, Hk, Wk] row-major signed integers, 1 byte each at
//      8-bit precision and 2 bytes at 16-bit.
// Layer shapes come from the network config, so reading needs the NetworkSpec.
inline constexpr std::uint32_t kWeightFileVersion = 1;

std::vector<std::uint8_t> serialize_weights(std::span<const FixedTensor> layers);
std::vector<FixedTensor> deserialize_weights(std::span<const std::uint8_t> bytes, const NetworkSpec& net);

void write_weight_file(const std::filesystem::path& path, std::span<const FixedTensor> layers);
std::vector<FixedTensor> read_weight_file(const std::filesystem::path& path, const NetworkSpec& net);

}  // namespace sbsim
