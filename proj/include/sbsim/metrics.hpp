#pragma once

#include <cstdint>
#include <string>

#include "sbsim/arch.hpp"
#include "sbsim/dataflow.hpp"
#include "sbsim/systolic.hpp"

namespace sbsim {

/// Runtime, energy and efficiency for one frame.
struct EnergyReport {
  double runtime_s = 0.0;
  double core_power_w = 0.0;
  double core_energy_j = 0.0;
  double dram_energy_j = 0.0;
  double total_energy_j = 0.0;
  // Average power over the frame, core plus DRAM.
  double average_power_w = 0.0;
  double frames_per_second = 0.0;
  double frames_per_joule = 0.0;
  double frames_per_s_per_mm2 = 0.0;
};

EnergyReport energy_report(std::uint64_t cycles, std::uint64_t dram_bits, const ArchConfig& arch, Precision precision);
EnergyReport energy_report(const CycleReport& cycles, const TrafficReport& traffic, const ArchConfig& arch,
                           Precision precision);

TrafficReport& operator+=(TrafficReport& a, const TrafficReport& b);

/// Whole-network totals for one simulated configuration.
struct RunSummary {
  std::string network;
  Precision precision = Precision::Int16;
  WorkloadMode mode = WorkloadMode::SparseBalanced;
  std::uint64_t total_cycles = 0;
  std::uint64_t compute_cycles = 0;
  TrafficReport traffic;
  EnergyReport energy;
};

RunSummary summarize(const std::string& network, Precision precision, WorkloadMode mode, const NetworkCycles& cycles,
                     const TrafficReport& traffic, const ArchConfig& arch);

/// Candidate relative to baseline. speedup and energy_efficiency_ratio are
/// baseline-over-candidate cost; the power and DRAM ratios are
/// candidate-over-baseline.
struct RatioTable {
  double speedup = 0.0;
  double compute_speedup = 0.0;
  double power_ratio = 0.0;
  double dram_ratio = 0.0;
  double weight_dram_ratio = 0.0;
  double energy_efficiency_ratio = 0.0;
};

/// Throws ValidationError when the runs are for different networks.
RatioTable compare_runs(const RunSummary& candidate, const RunSummary& baseline);

}  // namespace sbsim
