#include "sbsim/dataflow.hpp"

#include <algorithm>

#include "sbsim/encoder.hpp"
#include "sbsim/error.hpp"

namespace sbsim {

const char* to_string(Dataflow d) { return d == Dataflow::RIF ? "RIF" : "RWF"; }

int TilingPlan::active_spatial_tiles() const {
  const auto nr = std::count_if(rows.begin(), rows.end(), [](const AxisTile& t) { return !t.empty(); });
  const auto nc = std::count_if(cols.begin(), cols.end(), [](const AxisTile& t) { return !t.empty(); });
  return static_cast<int>(nr * nc);
}

int TilingPlan::ic_in_tile(int t, int n_ic) const { return std::min(n_pe, n_ic - t * n_pe); }
int TilingPlan::oc_in_tile(int t, int n_oc) const { return std::min(n_pe, n_oc - t * n_pe); }

std::vector<AxisTile> tile_axis(int in, int tile, int kernel, int stride) {
  const int outs = (in - kernel) / stride + 1;
  const int count = static_cast<int>(ceil_div(std::uint64_t(in), std::uint64_t(tile)));
  std::vector<AxisTile> out(count);
  for (int t = 0; t < count; ++t) {
    auto& a = out[t];
    a.tile_begin = t * tile;
    a.tile_end = std::min(in, (t + 1) * tile);
    a.out_begin = std::min(outs, (a.tile_begin + stride - 1) / stride);
    a.out_end = std::min(outs, (a.tile_end + stride - 1) / stride);
    if (a.out_end < a.out_begin) a.out_end = a.out_begin;
    if (!a.empty()) {
      a.in_begin = a.out_begin * stride;
      a.in_end = (a.out_end - 1) * stride + kernel;
    } else {
      a.in_begin = a.in_end = a.tile_begin;
    }
  }
  return out;
}

TilingPlan tile_layer(const LayerSpec& layer, const ArchConfig& arch) {
  if (arch.n_pe < 1 || arch.w_is < 1 || arch.h_is < 1) throw ValidationError("invalid array or tile size");
  output_dims(layer);
  TilingPlan p;
  p.n_pe = arch.n_pe;
  p.w_is = arch.w_is;
  p.h_is = arch.h_is;
  p.t_ic = static_cast<int>(ceil_div(layer.n_ic, arch.n_pe));
  p.t_oc = static_cast<int>(ceil_div(layer.n_oc, arch.n_pe));
  p.rows = tile_axis(layer.h_i, arch.h_is, layer.h_k, layer.stride);
  p.cols = tile_axis(layer.w_i, arch.w_is, layer.w_k, layer.stride);
  p.t_hi = static_cast<int>(p.rows.size());
  p.t_wi = static_cast<int>(p.cols.size());
  return p;
}

TrafficReport traffic_from_counts(std::uint64_t ifm_bits, std::uint64_t weight_bits, std::uint64_t ofm_bits,
                                  std::uint64_t t_oc, std::uint64_t spatial_tiles, Dataflow dataflow) {
  TrafficReport r;
  if (dataflow == Dataflow::RIF) {
    r.dram_bits_ifm = ifm_bits;
    r.dram_bits_weight = weight_bits * spatial_tiles;
  } else {
    r.dram_bits_ifm = ifm_bits * t_oc;
    r.dram_bits_weight = weight_bits;
  }
  r.dram_bits_ofm = ofm_bits;
  r.total_bits = r.dram_bits_ifm + r.dram_bits_weight + r.dram_bits_ofm;
  r.total_accesses = ceil_div(r.total_bits, 16);
  return r;
}

std::uint64_t ifm_tile_bits(const LayerSpec& layer, const TilingPlan& plan) {
  std::uint64_t rows = 0, cols = 0;
  for (const auto& t : plan.rows) rows += std::uint64_t(t.in_count());
  for (const auto& t : plan.cols) cols += std::uint64_t(t.in_count());
  return rows * cols * std::uint64_t(layer.n_ic) * std::uint64_t(bits_of(layer.precision));
}

std::uint64_t weight_bits(const LayerSpec& layer, WeightFormat format) {
  const std::uint64_t per = format == WeightFormat::Raw ? bits_of(layer.precision)
                                                        : bits_per_weight(layer.precision, layer.n_nzb_max);
  return layer.weight_count() * per;
}

std::uint64_t ofm_bits(const LayerSpec& layer) {
  const auto d = pooled_dims(layer);
  return std::uint64_t(layer.n_oc) * std::uint64_t(d.h) * std::uint64_t(d.w) * std::uint64_t(bits_of(layer.precision));
}

TrafficReport dram_traffic(const LayerSpec& layer, const TilingPlan& plan, Dataflow dataflow, WeightFormat format) {
  return traffic_from_counts(ifm_tile_bits(layer, plan), weight_bits(layer, format), ofm_bits(layer),
                             std::uint64_t(plan.t_oc), std::uint64_t(plan.active_spatial_tiles()), dataflow);
}

Dataflow choose_dataflow(const LayerSpec& layer, const TilingPlan& plan, WeightFormat format) {
  const auto rif = dram_traffic(layer, plan, Dataflow::RIF, format);
  const auto rwf = dram_traffic(layer, plan, Dataflow::RWF, format);
  return rwf.total_bits < rif.total_bits ? Dataflow::RWF : Dataflow::RIF;
}

std::vector<TilePass> schedule(const TilingPlan& plan, const LayerSpec& layer) {
  if (!plan.dataflow) throw ValidationError("plan for layer '" + layer.name + "' has no dataflow");
  const bool rif = *plan.dataflow == Dataflow::RIF;
  const int oc_rwf = rif ? 1 : plan.t_oc;
  const int oc_rif = rif ? plan.t_oc : 1;
  std::vector<TilePass> out;
  out.reserve(std::size_t(plan.active_spatial_tiles()) * plan.t_oc * plan.t_ic);
  for (int a = 0; a < oc_rwf; ++a)
    for (int b = 0; b < plan.t_wi; ++b) {
      if (plan.cols[b].empty()) continue;
      for (int c = 0; c < plan.t_hi; ++c) {
        if (plan.rows[c].empty()) continue;
        for (int d = 0; d < oc_rif; ++d)
          for (int e = 0; e < plan.t_ic; ++e) out.push_back({c, b, rif ? d : a, e});
      }
    }
  return out;
}

}  // namespace sbsim
