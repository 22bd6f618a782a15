#include "sbsim/systolic.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>

#include "sbsim/error.hpp"
#include "sbsim/reference.hpp"

namespace sbsim {

const char* to_string(WorkloadMode m) {
  switch (m) {
    case WorkloadMode::DenseBitSerial: return "dense";
    case WorkloadMode::SparseImbalanced: return "imbalanced";
    case WorkloadMode::SparseBalanced: return "balanced";
  }
  return "?";
}

WorkloadMode parse_workload(const std::string& s) {
  if (s == "dense") return WorkloadMode::DenseBitSerial;
  if (s == "imbalanced") return WorkloadMode::SparseImbalanced;
  if (s == "balanced") return WorkloadMode::SparseBalanced;
  throw ValidationError("unknown workload '" + s + "' (expected dense, imbalanced or balanced)");
}

WeightFormat weight_format_for(WorkloadMode m) {
  return m == WorkloadMode::DenseBitSerial ? WeightFormat::Raw : WeightFormat::Encoded;
}

bool PeState::gated() const {
  for (int l = 0; l < lanes(); ++l)
    if (!lane[l].gated) return false;
  return true;
}

PeState pe_step(const PeState& state, std::span<const LaneInput> inputs) {
  PeState next = state;
  const int width = psum_bits(state.precision);
  for (int l = 0; l < next.lanes(); ++l) {
    auto& lane = next.lane[l];
    if (l >= static_cast<int>(inputs.size()) || !inputs[l].slot.valid) {
      lane.gated = true;
      if (l < static_cast<int>(inputs.size())) {
        lane.ifm = inputs[l].ifm;
        lane.slot = inputs[l].slot;
      }
      continue;
    }
    const auto& in = inputs[l];
    lane.ifm = in.ifm;
    lane.slot = in.slot;
    lane.gated = false;
    const std::int64_t x = in.slot.sign ? -std::int64_t{in.ifm} : std::int64_t{in.ifm};
    lane.psum = wrap_signed(lane.psum + x * (std::int64_t{1} << in.slot.position), width);
  }
  ++next.cycles;
  return next;
}

PeState pe_step(const PeState& state, std::int32_t ifm, WeightSlot slot) {
  const LaneInput in{ifm, slot};
  return pe_step(state, std::span<const LaneInput>(&in, 1));
}

int weight_steps(int nnzb_count, WorkloadMode mode, Precision precision, int n_max) {
  switch (mode) {
    case WorkloadMode::DenseBitSerial: return bits_of(precision);
    case WorkloadMode::SparseImbalanced: return nnzb_count;
    case WorkloadMode::SparseBalanced: return n_max;
  }
  return 0;
}

ColumnTiming simulate_column(std::span<const int> nnzb_list, WorkloadMode mode, Precision precision, int n_max) {
  if (nnzb_list.empty()) throw ValidationError("simulate_column needs at least one weight");
  ColumnTiming t;
  for (int n : nnzb_list) t.latency = std::max(t.latency, weight_steps(n, mode, precision, n_max));
  for (int n : nnzb_list) {
    const int own = weight_steps(n, mode, precision, n_max);
    t.busy.push_back(own);
    t.idle.push_back(t.latency - own);
  }
  return t;
}

ColumnTiming simulate_column(std::span<const EncodedWeight> weights, WorkloadMode mode, Precision precision) {
  if (weights.empty()) throw ValidationError("simulate_column needs at least one weight");
  std::vector<int> counts;
  counts.reserve(weights.size());
  for (const auto& w : weights) counts.push_back(w.valid_count());
  return simulate_column(counts, mode, precision, weights.front().n_max);
}

ColumnTiming simulate_column_events(std::span<const int> nnzb_list, WorkloadMode mode, Precision precision,
                                    int n_max) {
  if (nnzb_list.empty()) throw ValidationError("simulate_column needs at least one weight");
  const std::size_t n = nnzb_list.size();
  std::vector<int> remaining(n);
  for (std::size_t i = 0; i < n; ++i) remaining[i] = weight_steps(nnzb_list[i], mode, precision, n_max);
  ColumnTiming t;
  t.busy.assign(n, 0);
  t.idle.assign(n, 0);
  // The controller advances only once every PE reports done.
  while (std::any_of(remaining.begin(), remaining.end(), [](int r) { return r > 0; })) {
    for (std::size_t i = 0; i < n; ++i) {
      if (remaining[i] > 0) {
        --remaining[i];
        ++t.busy[i];
      } else {
        ++t.idle[i];
      }
    }
    ++t.latency;
  }
  return t;
}

double CycleReport::utilization() const {
  const auto all = pe_busy_cycles + pe_idle_cycles;
  return all == 0 ? 0.0 : double(pe_busy_cycles) / double(all);
}

namespace {

struct PassCost {
  std::uint64_t compute = 0;
  std::uint64_t busy = 0;
  std::uint64_t gated = 0;
  std::uint64_t load_bits = 0;
};

std::uint64_t fill_drain(const ArchConfig& arch) { return 2 * std::uint64_t(arch.n_pe - 1); }

// Ping-pong refill: pass p's load overlaps pass p-1's window; the first
// load has nothing to hide behind.
CycleReport finish_conv(const LayerSpec& layer, const std::vector<PassCost>& passes, const ArchConfig& arch) {
  CycleReport r;
  r.layer = layer.name;
  const std::uint64_t fd = fill_drain(arch);
  const std::uint64_t array = std::uint64_t(arch.n_pe) * std::uint64_t(arch.n_pe);
  std::uint64_t prev_window = 0;
  for (std::size_t p = 0; p < passes.size(); ++p) {
    const auto& c = passes[p];
    const std::uint64_t load = ceil_div(c.load_bits, std::uint64_t(arch.dram_bits_per_cycle));
    r.stall_cycles += p == 0 ? load : (load > prev_window ? load - prev_window : 0);
    prev_window = c.compute + fd;
    r.compute_cycles += c.compute;
    r.fill_drain_cycles += fd;
    r.pe_busy_cycles += c.busy;
    r.compute_idle_cycles += array * c.compute - c.busy;
    r.gated_step_count += c.gated;
    r.load_bits += c.load_bits;
  }
  r.passes = passes.size();
  r.total_cycles = r.compute_cycles + r.fill_drain_cycles + r.stall_cycles;
  r.pe_idle_cycles = array * r.total_cycles - r.pe_busy_cycles;
  return r;
}

// FC: one column streams the weights; loading and compute overlap fully.
CycleReport finish_fc(const LayerSpec& layer, std::uint64_t compute, std::uint64_t busy, std::uint64_t gated,
                      std::uint64_t groups, std::uint64_t load_bits, const ArchConfig& arch) {
  CycleReport r;
  r.layer = layer.name;
  const std::uint64_t array = std::uint64_t(arch.n_pe) * std::uint64_t(arch.n_pe);
  const std::uint64_t load = ceil_div(load_bits, std::uint64_t(arch.dram_bits_per_cycle));
  r.compute_cycles = compute;
  r.fill_drain_cycles = fill_drain(arch);
  r.stall_cycles = load > compute ? load - compute : 0;
  r.total_cycles = r.compute_cycles + r.fill_drain_cycles + r.stall_cycles;
  r.pe_busy_cycles = busy;
  r.pe_idle_cycles = array * r.total_cycles - busy;
  r.compute_idle_cycles = array * compute - busy;
  r.gated_step_count = gated;
  r.passes = groups;
  r.load_bits = load_bits;
  return r;
}

void check_inputs(const LayerSpec& layer, const EncodedLayer& enc, const TilingPlan& plan, const ArchConfig& arch) {
  if (auto problems = arch.check(); !problems.empty()) throw ValidationError("arch: " + problems.front());
  if (auto diags = validate_layer(layer, 0); !diags.empty()) throw ValidationError(diags.front().to_string());
  const auto wd = layer.weight_dims();
  if (enc.dims() != wd) throw ValidationError("encoded weights do not match layer '" + layer.name + "'");
  if (enc.precision() != layer.precision) throw ValidationError("encoded precision does not match layer");
  if (enc.n_max() != layer.n_nzb_max) throw ValidationError("encoded n_max does not match layer n_nzb_max");
  const auto expect = tile_layer(layer, arch);
  if (plan.n_pe != expect.n_pe || plan.w_is != expect.w_is || plan.h_is != expect.h_is || plan.t_ic != expect.t_ic ||
      plan.t_oc != expect.t_oc || plan.t_wi != expect.t_wi || plan.t_hi != expect.t_hi ||
      plan.rows.size() != expect.rows.size() || plan.cols.size() != expect.cols.size())
    throw ValidationError("tiling plan does not match layer '" + layer.name + "'");
  for (std::size_t i = 0; i < plan.rows.size(); ++i)
    if (plan.rows[i].out_begin != expect.rows[i].out_begin || plan.rows[i].out_end != expect.rows[i].out_end ||
        plan.rows[i].in_begin != expect.rows[i].in_begin || plan.rows[i].in_end != expect.rows[i].in_end)
      throw ValidationError("tiling plan rows do not match layer '" + layer.name + "'");
  for (std::size_t i = 0; i < plan.cols.size(); ++i)
    if (plan.cols[i].out_begin != expect.cols[i].out_begin || plan.cols[i].out_end != expect.cols[i].out_end ||
        plan.cols[i].in_begin != expect.cols[i].in_begin || plan.cols[i].in_end != expect.cols[i].in_end)
      throw ValidationError("tiling plan columns do not match layer '" + layer.name + "'");
  if (!plan.dataflow) throw ValidationError("plan for layer '" + layer.name + "' has no dataflow");
}

std::uint64_t weight_bits_each(const LayerSpec& layer, WorkloadMode mode) {
  return weight_format_for(mode) == WeightFormat::Raw ? bits_of(layer.precision)
                                                      : bits_per_weight(layer.precision, layer.n_nzb_max);
}

void check_capacity(const LayerSpec& layer, const TilingPlan& plan, WorkloadMode mode, const ArchConfig& arch) {
  if (layer.kind != LayerKind::Conv) return;
  int max_rows = 0, max_cols = 0, max_out_r = 0, max_out_c = 0;
  for (const auto& t : plan.rows) max_rows = std::max(max_rows, t.in_count()), max_out_r = std::max(max_out_r, t.out_count());
  for (const auto& t : plan.cols) max_cols = std::max(max_cols, t.in_count()), max_out_c = std::max(max_out_c, t.out_count());
  const int bits = bits_of(layer.precision);
  const std::uint64_t ifm_words = ceil_div(std::uint64_t(max_rows) * std::uint64_t(max_cols) * bits, 16);
  const std::uint64_t oc_cols = std::uint64_t(std::min(arch.n_pe, layer.n_oc));
  const std::uint64_t slice_words = ceil_div(oc_cols * weight_bits_each(layer, mode), 16);
  const auto half = arch.row_buffer_half_words();
  if (ifm_words + slice_words > std::uint64_t(std::max<std::int64_t>(half, 0)))
    throw ValidationError("buffer overflow: layer '" + layer.name + "' needs " + std::to_string(ifm_words + slice_words) +
                          " words per row buffer half, have " + std::to_string(half));
  const std::uint64_t out_words =
      std::uint64_t(max_out_r) * std::uint64_t(max_out_c) * oc_cols * std::uint64_t(psum_bits(layer.precision) / 16);
  if (out_words > std::uint64_t(arch.output_buffer_words))
    throw ValidationError("buffer overflow: layer '" + layer.name + "' needs " + std::to_string(out_words) +
                          " output buffer words, have " + std::to_string(arch.output_buffer_words));
}

// Which passes bring data in from DRAM, matching dram_traffic's counts.
struct LoadFlags {
  bool ifm = false;
  bool weights = false;
};

std::vector<LoadFlags> load_flags(const std::vector<TilePass>& passes, Dataflow df) {
  std::vector<LoadFlags> out(passes.size());
  if (passes.empty()) return out;
  const int first_r = passes.front().row_tile, first_c = passes.front().col_tile;
  for (std::size_t p = 0; p < passes.size(); ++p) {
    const auto& t = passes[p];
    if (df == Dataflow::RIF) {
      out[p].weights = true;
      out[p].ifm = t.oc_tile == 0;
    } else {
      out[p].ifm = true;
      out[p].weights = t.row_tile == first_r && t.col_tile == first_c;
    }
  }
  return out;
}

struct WeightTables {
  int k = 0;
  // [oc_tile][ic_tile][kpos] max NNZB over the mapped block.
  std::vector<std::uint8_t> block_max;
  // [oc_tile][ic_tile] sums of NNZB and of (n_max - NNZB).
  std::vector<std::uint64_t> block_nnzb;
  std::vector<std::uint64_t> block_gap;
};

WeightTables weight_tables(const LayerSpec& layer, const EncodedLayer& enc, const TilingPlan& plan) {
  WeightTables t;
  t.k = layer.h_k * layer.w_k;
  const std::size_t blocks = std::size_t(plan.t_oc) * plan.t_ic;
  t.block_max.assign(blocks * t.k, 0);
  t.block_nnzb.assign(blocks, 0);
  t.block_gap.assign(blocks, 0);
  const int n_max = enc.n_max();
  std::size_t idx = 0;
  for (int o = 0; o < layer.n_oc; ++o) {
    const std::size_t d = std::size_t(o / plan.n_pe);
    for (int i = 0; i < layer.n_ic; ++i) {
      const std::size_t blk = d * plan.t_ic + std::size_t(i / plan.n_pe);
      for (int kp = 0; kp < t.k; ++kp, ++idx) {
        const int n = enc.valid_count(idx);
        auto& m = t.block_max[blk * t.k + kp];
        m = std::max<std::uint8_t>(m, static_cast<std::uint8_t>(n));
        t.block_nnzb[blk] += std::uint64_t(n);
        t.block_gap[blk] += std::uint64_t(n_max - n);
      }
    }
  }
  return t;
}

std::vector<PassCost> conv_pass_costs(const LayerSpec& layer, const EncodedLayer& enc, const TilingPlan& plan,
                                      const std::vector<TilePass>& passes, WorkloadMode mode) {
  const auto tables = weight_tables(layer, enc, plan);
  const int prec = bits_of(layer.precision);
  const int n_max = enc.n_max();
  const std::uint64_t k = std::uint64_t(tables.k);
  const std::uint64_t wbits = weight_bits_each(layer, mode);
  const auto flags = load_flags(passes, *plan.dataflow);

  std::vector<PassCost> out(passes.size());
  for (std::size_t p = 0; p < passes.size(); ++p) {
    const auto& t = passes[p];
    const auto& rt = plan.rows[t.row_tile];
    const auto& ct = plan.cols[t.col_tile];
    const std::uint64_t ic_n = plan.ic_in_tile(t.ic_tile, layer.n_ic);
    const std::uint64_t oc_n = plan.oc_in_tile(t.oc_tile, layer.n_oc);
    const std::uint64_t px = std::uint64_t(rt.out_count()) * std::uint64_t(ct.out_count());
    const std::uint64_t steps = ceil_div(px, std::uint64_t(lanes_of(layer.precision)));
    const std::size_t blk = std::size_t(t.oc_tile) * plan.t_ic + std::size_t(t.ic_tile);
    auto& c = out[p];
    switch (mode) {
      case WorkloadMode::DenseBitSerial:
        c.compute = steps * k * std::uint64_t(prec);
        c.busy = c.compute * ic_n * oc_n;
        break;
      case WorkloadMode::SparseBalanced:
        c.compute = steps * k * std::uint64_t(n_max);
        c.busy = c.compute * ic_n * oc_n;
        c.gated = px * tables.block_gap[blk];
        break;
      case WorkloadMode::SparseImbalanced: {
        std::uint64_t lat = 0;
        for (std::uint64_t kp = 0; kp < k; ++kp) lat += tables.block_max[blk * k + kp];
        c.compute = steps * lat;
        c.busy = steps * tables.block_nnzb[blk];
        break;
      }
    }
    if (flags[p].ifm)
      c.load_bits += ic_n * std::uint64_t(rt.in_count()) * std::uint64_t(ct.in_count()) * std::uint64_t(prec);
    if (flags[p].weights) c.load_bits += ic_n * oc_n * k * wbits;
  }
  return out;
}

std::uint64_t fc_load_bits(const LayerSpec& layer, const TilingPlan& plan, WorkloadMode mode) {
  const auto tr = dram_traffic(layer, plan, *plan.dataflow, weight_format_for(mode));
  return tr.dram_bits_ifm + tr.dram_bits_weight;
}

CycleReport fc_timing(const LayerSpec& layer, const EncodedLayer& enc, const TilingPlan& plan, WorkloadMode mode,
                      const ArchConfig& arch) {
  const int lanes = lanes_of(layer.precision);
  const int prec = bits_of(layer.precision);
  const int n_max = enc.n_max();
  const std::size_t nic = layer.n_ic;
  const std::size_t noc = layer.n_oc;
  std::uint64_t compute = 0, busy = 0, gated = 0, groups = 0;
  for (std::size_t o0 = 0; o0 < noc; o0 += lanes) {
    const std::size_t o1 = std::min(noc, o0 + lanes);
    for (std::size_t i0 = 0; i0 < nic; i0 += arch.n_pe, ++groups) {
      const std::size_t i1 = std::min(nic, i0 + std::size_t(arch.n_pe));
      const std::uint64_t rows = i1 - i0;
      if (mode == WorkloadMode::DenseBitSerial) {
        compute += prec;
        busy += rows * prec;
      } else if (mode == WorkloadMode::SparseBalanced) {
        compute += n_max;
        busy += rows * n_max;
        for (std::size_t o = o0; o < o1; ++o)
          for (std::size_t i = i0; i < i1; ++i) gated += std::uint64_t(n_max - enc.valid_count(o * nic + i));
      } else {
        int lat = 0;
        for (std::size_t i = i0; i < i1; ++i) {
          int pe = 0;
          for (std::size_t o = o0; o < o1; ++o) pe = std::max(pe, enc.valid_count(o * nic + i));
          busy += std::uint64_t(pe);
          lat = std::max(lat, pe);
        }
        compute += std::uint64_t(lat);
      }
    }
  }
  return finish_fc(layer, compute, busy, gated, groups, fc_load_bits(layer, plan, mode), arch);
}

// Shift list for one weight as the PE walks it under each mode. Dense walks
// every magnitude bit, imbalanced only the valid slots, balanced all n_max
// slots with the bitmap gating the empty ones.
struct ShiftList {
  std::array<std::uint8_t, 16> pos{};
  int count = 0;
  bool sign = false;
};

ShiftList shifts_for(const EncodedLayer& enc, std::size_t idx, WorkloadMode mode) {
  ShiftList s;
  s.sign = enc.sign(idx);
  const auto pos = enc.positions(idx);
  const auto bm = enc.bitmap(idx);
  switch (mode) {
    case WorkloadMode::DenseBitSerial: {
      const std::uint32_t mag = static_cast<std::uint32_t>(std::abs(enc.decoded(idx)));
      for (int b = bits_of(enc.precision()) - 1; b >= 0; --b)
        if ((mag >> b) & 1u) s.pos[s.count++] = static_cast<std::uint8_t>(b);
      break;
    }
    // Imbalanced skips invalid slots while balanced spends a gated cycle on
    // each; the arithmetic is the same.
    case WorkloadMode::SparseImbalanced:
    case WorkloadMode::SparseBalanced:
      for (int j = 0; j < enc.n_max(); ++j)
        if ((bm >> j) & 1u) s.pos[s.count++] = pos[j];
      break;
  }
  return s;
}

// Bit-exact OFM by replaying the pass schedule with tile-local modular
// accumulators; an output tile's accumulators live until its last IC pass.
FixedTensor functional_conv(const LayerSpec& layer, const EncodedLayer& enc, const FixedTensor& ifm,
                            const TilingPlan& plan, const std::vector<TilePass>& passes, WorkloadMode mode) {
  const auto od = output_dims(layer);
  const std::size_t ho = od.h, wo = od.w, hi = layer.h_i, wi = layer.w_i;
  const std::size_t hk = layer.h_k, wk = layer.w_k, s = layer.stride;
  const std::size_t nic = layer.n_ic;
  const int pbits = psum_bits(layer.precision);
  const auto in = ifm.values();

  std::vector<std::int16_t> ofm(std::size_t(layer.n_oc) * ho * wo, 0);
  std::vector<std::uint32_t> acc;
  std::vector<std::uint32_t> g, ng;
  const TilePass* open = nullptr;

  // Weights are revisited once per spatial tile; decode their shift lists once.
  std::vector<ShiftList> table;
  if (plan.active_spatial_tiles() > 1) {
    table.resize(enc.weight_count());
    for (std::size_t w = 0; w < table.size(); ++w) table[w] = shifts_for(enc, w, mode);
  }

  for (const auto& t : passes) {
    const auto& rt = plan.rows[t.row_tile];
    const auto& ct = plan.cols[t.col_tile];
    const std::size_t pr = rt.out_count(), pc = ct.out_count(), px = pr * pc;
    const std::size_t oc0 = std::size_t(t.oc_tile) * plan.n_pe, oc_n = plan.oc_in_tile(t.oc_tile, layer.n_oc);
    const std::size_t ic0 = std::size_t(t.ic_tile) * plan.n_pe, ic_n = plan.ic_in_tile(t.ic_tile, layer.n_ic);

    if (t.ic_tile == 0) {
      if (open) throw std::logic_error("partial sums evicted before the IC reduction finished");
      acc.assign(oc_n * px, 0);
      open = &t;
    } else if (!open || open->row_tile != t.row_tile || open->col_tile != t.col_tile || open->oc_tile != t.oc_tile) {
      throw std::logic_error("IC pass arrived for an output tile that is not resident");
    }

    g.resize(px);
    ng.resize(px);
    for (std::size_t i = ic0; i < ic0 + ic_n; ++i) {
      for (std::size_t a = 0; a < hk; ++a) {
        for (std::size_t b = 0; b < wk; ++b) {
          std::size_t p = 0;
          for (std::size_t y = rt.out_begin; y < std::size_t(rt.out_end); ++y) {
            const std::int16_t* row = in.data() + (i * hi + y * s + a) * wi + b;
            for (std::size_t x = ct.out_begin; x < std::size_t(ct.out_end); ++x, ++p) {
              g[p] = static_cast<std::uint32_t>(static_cast<std::int32_t>(row[x * s]));
              ng[p] = 0u - g[p];
            }
          }
          for (std::size_t o = 0; o < oc_n; ++o) {
            const std::size_t idx = (((oc0 + o) * nic + i) * hk + a) * wk + b;
            const auto sl = table.empty() ? shifts_for(enc, idx, mode) : table[idx];
            const std::uint32_t* src = sl.sign ? ng.data() : g.data();
            std::uint32_t* dst = acc.data() + o * px;
            for (int k = 0; k < sl.count; ++k) {
              const unsigned sh = sl.pos[k];
              for (std::size_t q = 0; q < px; ++q) dst[q] += src[q] << sh;
            }
          }
        }
      }
    }

    if (t.ic_tile == plan.t_ic - 1) {
      for (std::size_t o = 0; o < oc_n; ++o) {
        std::size_t p = 0;
        for (std::size_t y = rt.out_begin; y < std::size_t(rt.out_end); ++y)
          for (std::size_t x = ct.out_begin; x < std::size_t(ct.out_end); ++x, ++p) {
            const std::int64_t ps = wrap_signed(std::int64_t(acc[o * px + p]), pbits);
            ofm[((oc0 + o) * ho + y) * wo + x] = static_cast<std::int16_t>(write_out(ps, layer));
          }
      }
      open = nullptr;
    }
  }
  if (open) throw std::logic_error("schedule ended with an unfinished output tile");
  return FixedTensor::adopt({std::size_t(layer.n_oc), ho, wo}, layer.precision, std::move(ofm));
}

}  // namespace

TilingPlan plan_layer(const LayerSpec& layer, const ArchConfig& arch, WorkloadMode mode) {
  auto plan = tile_layer(layer, arch);
  plan.dataflow = choose_dataflow(layer, plan, weight_format_for(mode));
  return plan;
}

LayerSimResult simulate_layer(const LayerSpec& layer, const EncodedLayer& enc, const FixedTensor& ifm,
                              const TilingPlan& plan, WorkloadMode mode, const ArchConfig& arch,
                              const SimOptions& options) {
  check_inputs(layer, enc, plan, arch);
  if (options.functional) check_conv_shapes(ifm, enc.dims(), enc.precision(), layer);
  check_capacity(layer, plan, mode, arch);

  const auto passes = schedule(plan, layer);
  LayerSimResult result;
  if (layer.kind == LayerKind::FC) {
    result.cycles = fc_timing(layer, enc, plan, mode, arch);
  } else {
    result.cycles = finish_conv(layer, conv_pass_costs(layer, enc, plan, passes, mode), arch);
  }
  if (options.functional) result.ofm = relu_pool(functional_conv(layer, enc, ifm, plan, passes, mode), layer);
  return result;
}

namespace {

std::vector<WeightSlot> slot_queue(const EncodedLayer& enc, std::size_t idx, WorkloadMode mode) {
  std::vector<WeightSlot> q;
  const bool sign = enc.sign(idx);
  const auto pos = enc.positions(idx);
  const auto bm = enc.bitmap(idx);
  switch (mode) {
    case WorkloadMode::DenseBitSerial: {
      const std::uint32_t mag = static_cast<std::uint32_t>(std::abs(enc.decoded(idx)));
      for (int b = bits_of(enc.precision()) - 1; b >= 0; --b)
        q.push_back({sign, static_cast<std::uint8_t>(b), ((mag >> b) & 1u) != 0});
      break;
    }
    case WorkloadMode::SparseImbalanced:
      for (int j = 0; j < enc.n_max(); ++j)
        if ((bm >> j) & 1u) q.push_back({sign, pos[j], true});
      break;
    case WorkloadMode::SparseBalanced:
      for (int j = 0; j < enc.n_max(); ++j) q.push_back({sign, pos[j], ((bm >> j) & 1u) != 0});
      break;
  }
  return q;
}

// One controller step: every PE in `pes` drains its lanes' slot queues; the
// step ends when the longest queue is empty.
struct EventPe {
  PeState state;
  std::array<std::vector<WeightSlot>, 2> queue;
  std::array<std::int32_t, 2> ifm{};
  int active_lanes = 0;
};

struct StepCounters {
  std::uint64_t cycles = 0;
  std::uint64_t busy = 0;
  std::uint64_t gated = 0;
};

void run_step(std::vector<EventPe>& pes, WorkloadMode mode, StepCounters& c) {
  std::size_t longest = 0;
  for (const auto& pe : pes)
    for (int l = 0; l < pe.active_lanes; ++l) longest = std::max(longest, pe.queue[l].size());
  for (std::size_t t = 0; t < longest; ++t) {
    for (auto& pe : pes) {
      std::array<LaneInput, 2> in{};
      bool any = false;
      const std::size_t lanes = std::min<std::size_t>(std::size_t(pe.active_lanes), in.size());
      for (std::size_t l = 0; l < lanes; ++l) {
        if (t < pe.queue[l].size()) {
          in[l] = {pe.ifm[l], pe.queue[l][t]};
          any = true;
          if (mode == WorkloadMode::SparseBalanced && !in[l].slot.valid) ++c.gated;
        }
      }
      if (!any) continue;
      pe.state = pe_step(pe.state, std::span<const LaneInput>(in.data(), lanes));
      ++c.busy;
    }
    ++c.cycles;
  }
}

}  // namespace

LayerSimResult simulate_layer_events(const LayerSpec& layer, const EncodedLayer& enc, const FixedTensor& ifm,
                                     const TilingPlan& plan, WorkloadMode mode, const ArchConfig& arch) {
  if (arch.n_pe > 8) throw ValidationError("event model supports arrays up to 8x8");
  check_inputs(layer, enc, plan, arch);
  check_conv_shapes(ifm, enc.dims(), enc.precision(), layer);
  check_capacity(layer, plan, mode, arch);

  const auto od = output_dims(layer);
  const std::size_t ho = od.h, wo = od.w, hi = layer.h_i, wi = layer.w_i;
  const std::size_t hk = layer.h_k, wk = layer.w_k, s = layer.stride;
  const std::size_t nic = layer.n_ic, noc = layer.n_oc;
  const int lanes = lanes_of(layer.precision);
  const int pbits = psum_bits(layer.precision);
  const auto in = ifm.values();
  std::vector<std::int64_t> wide(noc * ho * wo, 0);

  LayerSimResult result;
  if (layer.kind == LayerKind::FC) {
    StepCounters c;
    std::uint64_t groups = 0;
    for (std::size_t o0 = 0; o0 < noc; o0 += lanes) {
      const int used = static_cast<int>(std::min<std::size_t>(lanes, noc - o0));
      for (std::size_t i0 = 0; i0 < nic; i0 += arch.n_pe, ++groups) {
        std::vector<EventPe> pes;
        for (std::size_t i = i0; i < std::min(nic, i0 + std::size_t(arch.n_pe)); ++i) {
          EventPe pe;
          pe.state.precision = layer.precision;
          pe.active_lanes = used;
          for (int l = 0; l < used; ++l) {
            pe.ifm[l] = in[i];
            pe.queue[l] = slot_queue(enc, (o0 + l) * nic + i, mode);
          }
          pes.push_back(std::move(pe));
        }
        run_step(pes, mode, c);
        for (const auto& pe : pes)
          for (int l = 0; l < used; ++l) wide[o0 + l] += pe.state.lane[l].psum;
      }
    }
    result.cycles = finish_fc(layer, c.cycles, c.busy, c.gated, groups, fc_load_bits(layer, plan, mode), arch);
  } else {
    const auto passes = schedule(plan, layer);
    const auto flags = load_flags(passes, *plan.dataflow);
    const std::uint64_t wbits = weight_bits_each(layer, mode);
    std::vector<PassCost> costs(passes.size());
    for (std::size_t p = 0; p < passes.size(); ++p) {
      const auto& t = passes[p];
      const auto& rt = plan.rows[t.row_tile];
      const auto& ct = plan.cols[t.col_tile];
      const std::size_t oc0 = std::size_t(t.oc_tile) * plan.n_pe, oc_n = plan.oc_in_tile(t.oc_tile, layer.n_oc);
      const std::size_t ic0 = std::size_t(t.ic_tile) * plan.n_pe, ic_n = plan.ic_in_tile(t.ic_tile, layer.n_ic);
      std::vector<std::pair<std::size_t, std::size_t>> pixels;
      for (int y = rt.out_begin; y < rt.out_end; ++y)
        for (int x = ct.out_begin; x < ct.out_end; ++x) pixels.emplace_back(y, x);

      StepCounters c;
      for (std::size_t g0 = 0; g0 < pixels.size(); g0 += lanes) {
        const int used = static_cast<int>(std::min<std::size_t>(lanes, pixels.size() - g0));
        std::vector<EventPe> pes(ic_n * oc_n);
        for (auto& pe : pes) {
          pe.state.precision = layer.precision;
          pe.active_lanes = used;
        }
        for (std::size_t a = 0; a < hk; ++a) {
          for (std::size_t b = 0; b < wk; ++b) {
            for (std::size_t r = 0; r < ic_n; ++r) {
              for (std::size_t col = 0; col < oc_n; ++col) {
                auto& pe = pes[r * oc_n + col];
                const auto q = slot_queue(enc, (((oc0 + col) * nic + ic0 + r) * hk + a) * wk + b, mode);
                for (int l = 0; l < used; ++l) {
                  const auto [y, x] = pixels[g0 + l];
                  pe.ifm[l] = in[((ic0 + r) * hi + y * s + a) * wi + x * s + b];
                  pe.queue[l] = q;
                }
              }
            }
            run_step(pes, mode, c);
          }
        }
        // Column reduction of each PE's partial sums.
        for (std::size_t r = 0; r < ic_n; ++r)
          for (std::size_t col = 0; col < oc_n; ++col)
            for (int l = 0; l < used; ++l) {
              const auto [y, x] = pixels[g0 + l];
              wide[((oc0 + col) * ho + y) * wo + x] += pes[r * oc_n + col].state.lane[l].psum;
            }
      }
      costs[p].compute = c.cycles;
      costs[p].busy = c.busy;
      costs[p].gated = c.gated;
      if (flags[p].ifm)
        costs[p].load_bits +=
            ic_n * std::uint64_t(rt.in_count()) * std::uint64_t(ct.in_count()) * std::uint64_t(bits_of(layer.precision));
      if (flags[p].weights) costs[p].load_bits += ic_n * oc_n * hk * wk * wbits;
    }
    result.cycles = finish_conv(layer, costs, arch);
  }

  std::vector<std::int16_t> ofm(wide.size());
  for (std::size_t i = 0; i < wide.size(); ++i)
    ofm[i] = static_cast<std::int16_t>(write_out(wrap_signed(wide[i], pbits), layer));
  result.ofm = relu_pool(FixedTensor::adopt({noc, ho, wo}, layer.precision, std::move(ofm)), layer);
  return result;
}

NetworkCycles aggregate_cycles(std::vector<CycleReport> layers, const ArchConfig& arch) {
  NetworkCycles n;
  n.layers = std::move(layers);
  for (const auto& l : n.layers) n.total_cycles += l.total_cycles;
  n.frames_per_second = n.total_cycles == 0 ? 0.0 : arch.clock_hz / double(n.total_cycles);
  return n;
}

NetworkCycles simulate_network(const NetworkSpec& net, std::span<const EncodedLayer> weights,
                               const ArchConfig& arch, WorkloadMode mode) {
  if (weights.size() != net.layers.size())
    throw ValidationError("network has " + std::to_string(net.layers.size()) + " layers but " +
                          std::to_string(weights.size()) + " weight sets were given");
  std::vector<CycleReport> out;
  out.reserve(net.layers.size());
  const FixedTensor none;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const auto& layer = net.layers[i];
    const auto plan = plan_layer(layer, arch, mode);
    out.push_back(simulate_layer(layer, weights[i], none, plan, mode, arch, SimOptions{false}).cycles);
  }
  return aggregate_cycles(std::move(out), arch);
}

}  // namespace sbsim
