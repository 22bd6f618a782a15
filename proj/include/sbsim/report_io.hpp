#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "sbsim/arch.hpp"
#include "sbsim/dataflow.hpp"
#include "sbsim/layer.hpp"
#include "sbsim/metrics.hpp"
#include "sbsim/quantizer.hpp"
#include "sbsim/systolic.hpp"

namespace sbsim {

// Fixed-format number rendering so reports are byte-stable.
std::string format_double(double v, int digits = 6);
std::string hex64(std::uint64_t v);

std::string quant_stats_csv(const NetworkSpec& net, const std::vector<QuantStats>& stats);

/// Tiling and both dataflows' traffic per layer, under `format` weights.
std::string plan_csv(const NetworkSpec& net, const ArchConfig& arch, WeightFormat format);

std::string cycles_csv_header();
std::string cycles_csv_row(const CycleReport& r, WorkloadMode mode);

std::string traffic_csv_header();
std::string traffic_csv_row(const std::string& layer, WorkloadMode mode, Dataflow df, const TrafficReport& t);

std::string energy_csv(const std::vector<RunSummary>& runs);
std::string ratios_csv(const RunSummary& candidate, const RunSummary& baseline, const RatioTable& r);

nlohmann::ordered_json cycle_report_to_json(const CycleReport& r);
nlohmann::ordered_json traffic_to_json(const TrafficReport& t);
nlohmann::ordered_json energy_to_json(const EnergyReport& e);
nlohmann::ordered_json run_summary_to_json(const RunSummary& s);
nlohmann::ordered_json ratios_to_json(const RatioTable& r);

/// Reads the fields run_summary_to_json writes (energy is recomputed by the
/// caller for a given arch).
RunSummary run_summary_from_json(const nlohmann::json& j);

}  // namespace sbsim
