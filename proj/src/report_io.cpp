#include "sbsim/report_io.hpp"

#include <cstdio>

#include "sbsim/error.hpp"

namespace sbsim {

std::string format_double(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string quant_stats_csv(const NetworkSpec& net, const std::vector<QuantStats>& stats) {
  std::string out = "layer,name,n_max,mse,max_abs_error,fraction_modified,hist_before,hist_after\n";
  auto hist = [](const std::vector<std::uint64_t>& h) {
    std::string s;
    for (std::size_t i = 0; i < h.size(); ++i) s += (i ? " " : "") + std::to_string(h[i]);
    return s;
  };
  for (const auto& st : stats) {
    const auto& name = net.layers.at(std::size_t(st.layer)).name;
    out += std::to_string(st.layer) + "," + name + "," + std::to_string(st.n_max) + "," + format_double(st.mse) + "," +
           std::to_string(st.max_abs_error) + "," + format_double(st.fraction_modified) + "," + hist(st.hist_before) +
           "," + hist(st.hist_after) + "\n";
  }
  return out;
}

std::string plan_csv(const NetworkSpec& net, const ArchConfig& arch, WeightFormat format) {
  std::string out =
      "layer,name,kind,t_ic,t_oc,t_wi,t_hi,w_is,h_is,active_tiles,dataflow,"
      "rif_ifm_bits,rif_weight_bits,rif_ofm_bits,rif_total_bits,"
      "rwf_ifm_bits,rwf_weight_bits,rwf_ofm_bits,rwf_total_bits\n";
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const auto& l = net.layers[i];
    const auto p = tile_layer(l, arch);
    const auto rif = dram_traffic(l, p, Dataflow::RIF, format);
    const auto rwf = dram_traffic(l, p, Dataflow::RWF, format);
    const auto df = choose_dataflow(l, p, format);
    out += std::to_string(i) + "," + l.name + "," + to_string(l.kind) + "," + std::to_string(p.t_ic) + "," +
           std::to_string(p.t_oc) + "," + std::to_string(p.t_wi) + "," + std::to_string(p.t_hi) + "," +
           std::to_string(p.w_is) + "," + std::to_string(p.h_is) + "," + std::to_string(p.active_spatial_tiles()) +
           "," + to_string(df);
    for (const auto* t : {&rif, &rwf})
      out += "," + std::to_string(t->dram_bits_ifm) + "," + std::to_string(t->dram_bits_weight) + "," +
             std::to_string(t->dram_bits_ofm) + "," + std::to_string(t->total_bits);
    out += "\n";
  }
  return out;
}

std::string cycles_csv_header() {
  return "layer,mode,total_cycles,compute_cycles,fill_drain_cycles,stall_cycles,pe_busy_cycles,pe_idle_cycles,"
         "compute_idle_cycles,utilization,gated_step_count,passes,load_bits\n";
}

std::string cycles_csv_row(const CycleReport& r, WorkloadMode mode) {
  return r.layer + "," + to_string(mode) + "," + std::to_string(r.total_cycles) + "," +
         std::to_string(r.compute_cycles) + "," + std::to_string(r.fill_drain_cycles) + "," +
         std::to_string(r.stall_cycles) + "," + std::to_string(r.pe_busy_cycles) + "," +
         std::to_string(r.pe_idle_cycles) + "," + std::to_string(r.compute_idle_cycles) + "," +
         format_double(r.utilization()) + "," + std::to_string(r.gated_step_count) + "," + std::to_string(r.passes) +
         "," + std::to_string(r.load_bits) + "\n";
}

std::string traffic_csv_header() { return "layer,mode,dataflow,ifm_bits,weight_bits,ofm_bits,total_bits,total_accesses\n"; }

std::string traffic_csv_row(const std::string& layer, WorkloadMode mode, Dataflow df, const TrafficReport& t) {
  return layer + "," + to_string(mode) + "," + to_string(df) + "," + std::to_string(t.dram_bits_ifm) + "," +
         std::to_string(t.dram_bits_weight) + "," + std::to_string(t.dram_bits_ofm) + "," +
         std::to_string(t.total_bits) + "," + std::to_string(t.total_accesses) + "\n";
}

std::string energy_csv(const std::vector<RunSummary>& runs) {
  std::string out =
      "network,precision,mode,total_cycles,runtime_s,core_energy_j,dram_energy_j,total_energy_j,average_power_w,"
      "frames_per_second,frames_per_joule,frames_per_s_per_mm2\n";
  for (const auto& r : runs) {
    const auto& e = r.energy;
    out += r.network + "," + std::to_string(bits_of(r.precision)) + "," + to_string(r.mode) + "," +
           std::to_string(r.total_cycles) + "," + format_double(e.runtime_s, 9) + "," +
           format_double(e.core_energy_j, 9) + "," + format_double(e.dram_energy_j, 9) + "," +
           format_double(e.total_energy_j, 9) + "," + format_double(e.average_power_w) + "," +
           format_double(e.frames_per_second) + "," + format_double(e.frames_per_joule) + "," +
           format_double(e.frames_per_s_per_mm2) + "\n";
  }
  return out;
}

std::string ratios_csv(const RunSummary& c, const RunSummary& b, const RatioTable& r) {
  return "network,candidate,baseline,speedup,compute_speedup,power_ratio,dram_ratio,weight_dram_ratio,"
         "energy_efficiency_ratio\n" +
         c.network + "," + to_string(c.mode) + "," + to_string(b.mode) + "," + format_double(r.speedup) + "," +
         format_double(r.compute_speedup) + "," + format_double(r.power_ratio) + "," + format_double(r.dram_ratio) +
         "," + format_double(r.weight_dram_ratio) + "," + format_double(r.energy_efficiency_ratio) + "\n";
}

nlohmann::ordered_json cycle_report_to_json(const CycleReport& r) {
  return {{"layer", r.layer},
          {"total_cycles", r.total_cycles},
          {"compute_cycles", r.compute_cycles},
          {"fill_drain_cycles", r.fill_drain_cycles},
          {"stall_cycles", r.stall_cycles},
          {"pe_busy_cycles", r.pe_busy_cycles},
          {"pe_idle_cycles", r.pe_idle_cycles},
          {"compute_idle_cycles", r.compute_idle_cycles},
          {"utilization", r.utilization()},
          {"gated_step_count", r.gated_step_count},
          {"passes", r.passes},
          {"load_bits", r.load_bits}};
}

nlohmann::ordered_json traffic_to_json(const TrafficReport& t) {
  return {{"dram_bits_ifm", t.dram_bits_ifm},
          {"dram_bits_weight", t.dram_bits_weight},
          {"dram_bits_ofm", t.dram_bits_ofm},
          {"total_bits", t.total_bits},
          {"total_accesses", t.total_accesses}};
}

nlohmann::ordered_json energy_to_json(const EnergyReport& e) {
  return {{"runtime_s", e.runtime_s},
          {"core_power_w", e.core_power_w},
          {"core_energy_j", e.core_energy_j},
          {"dram_energy_j", e.dram_energy_j},
          {"total_energy_j", e.total_energy_j},
          {"average_power_w", e.average_power_w},
          {"frames_per_second", e.frames_per_second},
          {"frames_per_joule", e.frames_per_joule},
          {"frames_per_s_per_mm2", e.frames_per_s_per_mm2}};
}

nlohmann::ordered_json run_summary_to_json(const RunSummary& s) {
  return {{"network", s.network},
          {"precision", bits_of(s.precision)},
          {"workload", to_string(s.mode)},
          {"total_cycles", s.total_cycles},
          {"compute_cycles", s.compute_cycles},
          {"traffic", traffic_to_json(s.traffic)},
          {"energy", energy_to_json(s.energy)}};
}

nlohmann::ordered_json ratios_to_json(const RatioTable& r) {
  return {{"speedup", r.speedup},
          {"compute_speedup", r.compute_speedup},
          {"power_ratio", r.power_ratio},
          {"dram_ratio", r.dram_ratio},
          {"weight_dram_ratio", r.weight_dram_ratio},
          {"energy_efficiency_ratio", r.energy_efficiency_ratio}};
}

RunSummary run_summary_from_json(const nlohmann::json& j) {
  try {
    RunSummary s;
    s.network = j.at("network").get<std::string>();
    const int bits = j.at("precision").get<int>();
    if (bits != 8 && bits != 16) throw FormatError("precision must be 8 or 16");
    s.precision = bits == 8 ? Precision::Int8 : Precision::Int16;
    s.mode = parse_workload(j.at("workload").get<std::string>());
    s.total_cycles = j.at("total_cycles").get<std::uint64_t>();
    s.compute_cycles = j.at("compute_cycles").get<std::uint64_t>();
    const auto& t = j.at("traffic");
    s.traffic.dram_bits_ifm = t.at("dram_bits_ifm").get<std::uint64_t>();
    s.traffic.dram_bits_weight = t.at("dram_bits_weight").get<std::uint64_t>();
    s.traffic.dram_bits_ofm = t.at("dram_bits_ofm").get<std::uint64_t>();
    s.traffic.total_bits = t.at("total_bits").get<std::uint64_t>();
    s.traffic.total_accesses = t.at("total_accesses").get<std::uint64_t>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("run summary: ") + e.what());
  }
}

}  // namespace sbsim
