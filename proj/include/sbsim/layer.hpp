#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sbsim/arch.hpp"
#include "sbsim/bits.hpp"

namespace sbsim {

enum class LayerKind { Conv, FC };

struct PoolSpec {
  int window = 2;
  int stride = 2;
  bool operator==(const PoolSpec&) const = default;
};

/// Shape and numeric configuration of one CONV or FC layer.
///
/// Padding is not modeled: h_i/w_i are the already-padded IFM extents.
struct LayerSpec {
  std::string name;
  LayerKind kind = LayerKind::Conv;
  int n_ic = 1;
  int n_oc = 1;
  int h_i = 1;
  int w_i = 1;
  int h_k = 1;
  int w_k = 1;
  int stride = 1;
  int n_nzb_max = 16;
  Precision precision = Precision::Int16;
  bool post_relu = false;
  std::optional<PoolSpec> pool;
  // Arithmetic right shift applied to the Psum before OFM write-out.
  int ofm_shift = 0;
  // Clamp instead of wrap on OFM write-out.
  bool saturate = false;
  // Input comes from somewhere other than the preceding layer (branch, concat).
  bool branch = false;

  std::uint64_t weight_count() const {
    return std::uint64_t(n_oc) * std::uint64_t(n_ic) * std::uint64_t(h_k) * std::uint64_t(w_k);
  }
  std::array<std::size_t, 4> weight_dims() const {
    return {std::size_t(n_oc), std::size_t(n_ic), std::size_t(h_k), std::size_t(w_k)};
  }
  std::array<std::size_t, 3> ifm_dims() const {
    return {std::size_t(n_ic), std::size_t(h_i), std::size_t(w_i)};
  }

  bool operator==(const LayerSpec&) const = default;
};

struct OutputDims {
  int h = 0;
  int w = 0;
  bool operator==(const OutputDims&) const = default;
};

/// Convolution output extent: floor((in - k) / stride) + 1; FC layers give 1x1.
/// Throws ValidationError("kernel exceeds input") when the kernel does not fit.
OutputDims output_dims(const LayerSpec& layer);

/// Output extent after the optional max-pool stage.
OutputDims pooled_dims(const LayerSpec& layer);

struct NetworkSpec {
  std::string name;
  std::array<int, 3> input_dims{1, 1, 1};  // C, H, W
  std::vector<LayerSpec> layers;
};

struct Diagnostic {
  int layer = -1;  // -1 for network/arch-level problems
  std::string field;
  std::string message;

  std::string to_string() const;
};

std::vector<Diagnostic> validate_layer(const LayerSpec& layer, int index);

/// Empty iff every layer invariant holds and consecutive shapes chain.
///
/// A CONV layer chains to its predecessor when channel counts match and its
/// IFM exceeds the predecessor's pooled output by 0..(k-1) rows/columns (the
/// implicit zero border). An FC layer chains when n_ic equals the flattened
/// predecessor output. Layers flagged `branch` skip the chain check.
std::vector<Diagnostic> validate_network(const NetworkSpec& net, const ArchConfig& arch);

const char* to_string(LayerKind kind);

}  // namespace sbsim
