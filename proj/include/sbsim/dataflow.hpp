#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sbsim/arch.hpp"
#include "sbsim/layer.hpp"

namespace sbsim {

enum class Dataflow { RIF, RWF };

// Raw weights cost `precision` bits each; encoded weights cost bits_per_weight.
enum class WeightFormat { Raw, Encoded };

const char* to_string(Dataflow d);

/// One tile along a spatial axis.
///
/// The tile owns IFM positions [tile_begin, tile_end). Output pixels whose
/// window origin falls inside are computed by this tile; in_begin/in_end is
/// the IFM extent they read, halo included. A tile can own no outputs.
struct AxisTile {
  int tile_begin = 0;
  int tile_end = 0;
  int out_begin = 0;
  int out_end = 0;
  int in_begin = 0;
  int in_end = 0;

  int out_count() const { return out_end - out_begin; }
  int in_count() const { return in_end - in_begin; }
  bool empty() const { return out_end <= out_begin; }
};

struct TilingPlan {
  int n_pe = 0;
  int t_ic = 1;
  int t_oc = 1;
  int t_wi = 1;
  int t_hi = 1;
  int w_is = 1;
  int h_is = 1;
  std::vector<AxisTile> rows;  // t_hi entries
  std::vector<AxisTile> cols;  // t_wi entries
  std::optional<Dataflow> dataflow;

  /// Spatial tiles that own at least one output pixel.
  int active_spatial_tiles() const;
  /// Channels in input-channel tile t (the last tile may be partial).
  int ic_in_tile(int t, int n_ic) const;
  int oc_in_tile(int t, int n_oc) const;
};

/// Splits one axis of extent `in` into tiles of `tile` positions.
std::vector<AxisTile> tile_axis(int in, int tile, int kernel, int stride);

TilingPlan tile_layer(const LayerSpec& layer, const ArchConfig& arch);

struct TrafficReport {
  std::uint64_t dram_bits_ifm = 0;
  std::uint64_t dram_bits_weight = 0;
  std::uint64_t dram_bits_ofm = 0;
  std::uint64_t total_bits = 0;
  // 16-bit words.
  std::uint64_t total_accesses = 0;

  bool operator==(const TrafficReport&) const = default;
};

/// Traffic from per-layer bit counts: RIF re-reads weights once per spatial
/// tile, RWF re-reads the IFM once per OC tile; the OFM is written once.
TrafficReport traffic_from_counts(std::uint64_t ifm_bits, std::uint64_t weight_bits, std::uint64_t ofm_bits,
                                  std::uint64_t t_oc, std::uint64_t spatial_tiles, Dataflow dataflow);

/// IFM bits read once, halo included.
std::uint64_t ifm_tile_bits(const LayerSpec& layer, const TilingPlan& plan);
std::uint64_t weight_bits(const LayerSpec& layer, WeightFormat format);
/// OFM bits after ReLU and pooling.
std::uint64_t ofm_bits(const LayerSpec& layer);

TrafficReport dram_traffic(const LayerSpec& layer, const TilingPlan& plan, Dataflow dataflow,
                           WeightFormat format = WeightFormat::Encoded);

/// Dataflow with the lower total traffic; ties go to RIF.
Dataflow choose_dataflow(const LayerSpec& layer, const TilingPlan& plan,
                         WeightFormat format = WeightFormat::Encoded);

struct TilePass {
  int row_tile = 0;
  int col_tile = 0;
  int oc_tile = 0;
  int ic_tile = 0;

  bool operator==(const TilePass&) const = default;
};

/// Tile passes in loop-nest order: OC (RWF), W tiles, H tiles, OC (RIF), IC.
/// The IC loop is innermost so every output tile finishes its reduction
/// before moving on. Spatial tiles without outputs are skipped.
std::vector<TilePass> schedule(const TilingPlan& plan, const LayerSpec& layer);

}  // namespace sbsim
