#include "sbsim/metrics.hpp"

#include "sbsim/error.hpp"

namespace sbsim {

namespace {
double ratio(double num, double den) { return den == 0.0 ? (num == 0.0 ? 1.0 : 0.0) : num / den; }
}  // namespace

EnergyReport energy_report(std::uint64_t cycles, std::uint64_t dram_bits, const ArchConfig& arch, Precision precision) {
  EnergyReport e;
  e.runtime_s = double(cycles) / arch.clock_hz;
  e.core_power_w = arch.core_power_mw(precision) * 1e-3;
  e.core_energy_j = e.core_power_w * e.runtime_s;
  e.dram_energy_j = double(dram_bits) * arch.dram_energy_pj_per_bit * 1e-12;
  e.total_energy_j = e.core_energy_j + e.dram_energy_j;
  if (e.runtime_s > 0) {
    e.average_power_w = e.total_energy_j / e.runtime_s;
    e.frames_per_second = 1.0 / e.runtime_s;
    e.frames_per_s_per_mm2 = e.frames_per_second / arch.area_mm2;
  }
  if (e.total_energy_j > 0) e.frames_per_joule = 1.0 / e.total_energy_j;
  return e;
}

EnergyReport energy_report(const CycleReport& cycles, const TrafficReport& traffic, const ArchConfig& arch,
                           Precision precision) {
  return energy_report(cycles.total_cycles, traffic.total_bits, arch, precision);
}

TrafficReport& operator+=(TrafficReport& a, const TrafficReport& b) {
  a.dram_bits_ifm += b.dram_bits_ifm;
  a.dram_bits_weight += b.dram_bits_weight;
  a.dram_bits_ofm += b.dram_bits_ofm;
  a.total_bits += b.total_bits;
  a.total_accesses += b.total_accesses;
  return a;
}

RunSummary summarize(const std::string& network, Precision precision, WorkloadMode mode, const NetworkCycles& cycles,
                     const TrafficReport& traffic, const ArchConfig& arch) {
  RunSummary s;
  s.network = network;
  s.precision = precision;
  s.mode = mode;
  s.total_cycles = cycles.total_cycles;
  for (const auto& l : cycles.layers) s.compute_cycles += l.compute_cycles;
  s.traffic = traffic;
  s.energy = energy_report(s.total_cycles, traffic.total_bits, arch, precision);
  return s;
}

RatioTable compare_runs(const RunSummary& candidate, const RunSummary& baseline) {
  if (candidate.network != baseline.network)
    throw ValidationError("cannot compare runs of different networks ('" + candidate.network + "' vs '" +
                          baseline.network + "')");
  RatioTable r;
  r.speedup = ratio(double(baseline.total_cycles), double(candidate.total_cycles));
  r.compute_speedup = ratio(double(baseline.compute_cycles), double(candidate.compute_cycles));
  r.power_ratio = ratio(candidate.energy.average_power_w, baseline.energy.average_power_w);
  r.dram_ratio = ratio(double(candidate.traffic.total_bits), double(baseline.traffic.total_bits));
  r.weight_dram_ratio =
      ratio(double(candidate.traffic.dram_bits_weight), double(baseline.traffic.dram_bits_weight));
  r.energy_efficiency_ratio = r.power_ratio == 0.0 ? 0.0 : r.speedup / r.power_ratio;
  return r;
}

}  // namespace sbsim
