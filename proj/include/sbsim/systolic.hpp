#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sbsim/arch.hpp"
#include "sbsim/dataflow.hpp"
#include "sbsim/encoder.hpp"
#include "sbsim/layer.hpp"
#include "sbsim/tensor.hpp"

namespace sbsim {

enum class WorkloadMode {
  DenseBitSerial,    // every weight costs `precision` steps
  SparseImbalanced,  // each weight costs its NNZB; the array waits for the slowest
  SparseBalanced,    // every weight costs n_max steps, invalid slots gated
};

const char* to_string(WorkloadMode m);
WorkloadMode parse_workload(const std::string& s);

// Dense runs fetch raw weights; sparse runs fetch the encoding.
WeightFormat weight_format_for(WorkloadMode m);

/// One shift-add step's weight operand.
struct WeightSlot {
  bool sign = false;
  std::uint8_t position = 0;
  bool valid = false;
};

struct LaneState {
  std::int32_t ifm = 0;
  WeightSlot slot;
  std::int64_t psum = 0;
  bool gated = false;
};

/// Complement / shift / accumulate datapath. One lane holds a 32-bit Psum in
/// 16-bit mode; 8-bit mode runs two independent lanes with 16-bit Psums.
struct PeState {
  Precision precision = Precision::Int16;
  std::array<LaneState, 2> lane{};
  std::uint64_t cycles = 0;

  int lanes() const { return lanes_of(precision); }
  bool gated() const;
};

struct LaneInput {
  std::int32_t ifm = 0;
  WeightSlot slot;
};

/// Advances one cycle. A lane whose slot is invalid keeps its Psum and is
/// marked gated; otherwise Psum += (sign ? -ifm : ifm) << position, wrapped at
/// the lane width. Lanes beyond inputs.size() are treated as gated.
PeState pe_step(const PeState& state, std::span<const LaneInput> inputs);
PeState pe_step(const PeState& state, std::int32_t ifm, WeightSlot slot);

struct ColumnTiming {
  int latency = 0;
  std::vector<int> busy;
  std::vector<int> idle;

  bool operator==(const ColumnTiming&) const = default;
};

/// Steps each PE needs for one weight under `mode`.
int weight_steps(int nnzb, WorkloadMode mode, Precision precision, int n_max);

/// Closed-form latency and per-PE idle for one group of PEs sharing a
/// controller step.
ColumnTiming simulate_column(std::span<const int> nnzb, WorkloadMode mode, Precision precision, int n_max);
ColumnTiming simulate_column(std::span<const EncodedWeight> weights, WorkloadMode mode, Precision precision);

/// Same result by ticking cycles until every PE drains its slot queue.
ColumnTiming simulate_column_events(std::span<const int> nnzb, WorkloadMode mode, Precision precision, int n_max);

struct CycleReport {
  std::string layer;
  std::uint64_t total_cycles = 0;
  std::uint64_t compute_cycles = 0;
  std::uint64_t fill_drain_cycles = 0;
  std::uint64_t stall_cycles = 0;
  // PE-cycles over the whole layer window; busy + idle = N_PE^2 * total_cycles.
  std::uint64_t pe_busy_cycles = 0;
  std::uint64_t pe_idle_cycles = 0;
  // Idle PE-cycles inside compute windows only (unmapped PEs, early finishers).
  std::uint64_t compute_idle_cycles = 0;
  std::uint64_t gated_step_count = 0;
  std::uint64_t passes = 0;
  // Bits read from DRAM by the ping-pong refills.
  std::uint64_t load_bits = 0;

  double utilization() const;
  bool operator==(const CycleReport&) const = default;
};

struct SimOptions {
  // Compute the OFM as well as the timing.
  bool functional = true;
};

struct LayerSimResult {
  // After write-out, ReLU and pooling; empty when not functional.
  FixedTensor ofm;
  CycleReport cycles;
};

/// Runs one layer on the array.
///
/// CONV layers follow `plan`'s pass schedule on the full array: rows take
/// input channels, columns take output channels, and each pass walks its
/// tile's output pixels (two per step in 8-bit mode) across every kernel
/// position. FC layers use a single column. Throws ValidationError on a
/// plan/layer mismatch or when a tile exceeds a buffer.
LayerSimResult simulate_layer(const LayerSpec& layer, const EncodedLayer& enc, const FixedTensor& ifm,
                              const TilingPlan& plan, WorkloadMode mode, const ArchConfig& arch,
                              const SimOptions& options = {});

/// Per-cycle model of the same layer, stepping every PE with pe_step. Only
/// for arrays up to 8x8; meant to check simulate_layer.
LayerSimResult simulate_layer_events(const LayerSpec& layer, const EncodedLayer& enc, const FixedTensor& ifm,
                                     const TilingPlan& plan, WorkloadMode mode, const ArchConfig& arch);

struct NetworkCycles {
  std::vector<CycleReport> layers;
  std::uint64_t total_cycles = 0;
  double frames_per_second = 0.0;
};

NetworkCycles aggregate_cycles(std::vector<CycleReport> layers, const ArchConfig& arch);

/// Timing for every layer in order, each with its preferred dataflow.
NetworkCycles simulate_network(const NetworkSpec& net, std::span<const EncodedLayer> weights,
                               const ArchConfig& arch, WorkloadMode mode);

/// Tiling plus chosen dataflow for a layer under `mode`'s weight format.
TilingPlan plan_layer(const LayerSpec& layer, const ArchConfig& arch, WorkloadMode mode);

}  // namespace sbsim
