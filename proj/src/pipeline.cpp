#include "sbsim/pipeline.hpp"

#include <cstdio>

#include "sbsim/config_io.hpp"
#include "sbsim/encoder.hpp"
#include "sbsim/error.hpp"
#include "sbsim/io.hpp"
#include "sbsim/quantizer.hpp"
#include "sbsim/reference.hpp"
#include "sbsim/report_io.hpp"
#include "sbsim/weight_file.hpp"

namespace sbsim {

namespace fs = std::filesystem;

NetworkSpec apply_overrides(NetworkSpec net, std::optional<Precision> precision, std::optional<int> n_max) {
  for (auto& l : net.layers) {
    if (precision) l.precision = *precision;
    if (n_max) l.n_nzb_max = *n_max;
  }
  return net;
}

ArchConfig load_arch_or_default(const std::optional<fs::path>& path) {
  ArchConfig arch = path ? load_arch(*path) : ArchConfig{};
  if (auto problems = arch.check(); !problems.empty()) {
    std::string msg = "invalid arch config:";
    for (const auto& p : problems) msg += " " + p + ";";
    throw ValidationError(msg);
  }
  return arch;
}

void require_valid(const NetworkSpec& net, const ArchConfig& arch) {
  const auto diags = validate_network(net, arch);
  if (diags.empty()) return;
  std::string msg = "network '" + net.name + "' is invalid:";
  for (const auto& d : diags) msg += "\n  " + d.to_string();
  throw ValidationError(msg);
}

fs::path encoded_layer_path(const fs::path& dir, std::size_t index, const std::string& name) {
  char prefix[16];
  std::snprintf(prefix, sizeof prefix, "%03zu_", index);
  return dir / (prefix + name + ".sbel");
}

namespace {

class Staging {
 public:
  explicit Staging(fs::path out) : out_(std::move(out)), dir_(out_ / ".staging") {
    fs::create_directories(out_);
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  ~Staging() {
    std::error_code ec;
    fs::remove_all(dir_, ec);
  }

  fs::path path(const fs::path& rel) const { return dir_ / rel; }

  void write(const fs::path& rel, std::string_view text) {
    write_file_atomic(path(rel), text);
    files_.push_back(rel);
  }
  void add(const fs::path& rel) { files_.push_back(rel); }

  // Moves every staged file into place.
  void commit() {
    for (const auto& rel : files_) {
      const auto dst = out_ / rel;
      fs::create_directories(dst.parent_path());
      fs::rename(path(rel), dst);
    }
  }
  const std::vector<fs::path>& files() const { return files_; }

 private:
  fs::path out_;
  fs::path dir_;
  std::vector<fs::path> files_;
};

}  // namespace

PipelineResult run_pipeline(const RunManifest& m) {
  ArchConfig arch;
  NetworkSpec net;
  std::vector<FixedTensor> weights;
  run_stage("ingest", [&] {
    if (m.out_dir.empty()) throw ValidationError("no output directory given");
    arch = load_arch_or_default(m.arch_path);
    net = apply_overrides(resolve_network(m.network), m.precision, m.n_max);
    require_valid(net, arch);
    weights = m.weights_file ? read_weight_file(*m.weights_file, net)
                             : generate_network_weights(net, m.seed, m.distribution, m.profile);
  });

  auto staging = run_stage("output", [&] { return std::make_unique<Staging>(m.out_dir); });

  std::vector<QuantStats> stats;
  run_stage("quantize", [&] {
    for (std::size_t i = 0; i < weights.size(); ++i) {
      auto q = quantize_tensor(weights[i], net.layers[i].n_nzb_max, static_cast<int>(i));
      weights[i] = std::move(q.tensor);
      stats.push_back(std::move(q.stats));
    }
    write_weight_file(staging->path("quantized.sbwf"), weights);
    staging->add("quantized.sbwf");
    staging->write("quant_stats.csv", quant_stats_csv(net, stats));
  });

  const WorkloadMode base_mode = WorkloadMode::DenseBitSerial;
  PipelineResult result;
  std::vector<CycleReport> cand_cycles, base_cycles;
  TrafficReport cand_traffic, base_traffic;
  std::string traffic_rows;
  std::string checks_csv = "layer,simulated_ofm_hash,golden_ofm_hash\n";
  fs::create_directories(staging->path("encoded"));

  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const auto& layer = net.layers[i];
    const auto enc = run_stage("encode", [&] {
      auto e = encode_layer(weights[i], layer.n_nzb_max);
      const auto rel = encoded_layer_path("encoded", i, layer.name);
      write_encoded_layer(staging->path(rel), e);
      staging->add(rel);
      return e;
    });

    TilingPlan cand_plan, base_plan;
    run_stage("plan", [&] {
      cand_plan = plan_layer(layer, arch, m.workload);
      base_plan = plan_layer(layer, arch, base_mode);
      const auto ct = dram_traffic(layer, cand_plan, *cand_plan.dataflow, weight_format_for(m.workload));
      const auto bt = dram_traffic(layer, base_plan, *base_plan.dataflow, weight_format_for(base_mode));
      cand_traffic += ct;
      base_traffic += bt;
      traffic_rows += traffic_csv_row(layer.name, m.workload, *cand_plan.dataflow, ct);
      traffic_rows += traffic_csv_row(layer.name, base_mode, *base_plan.dataflow, bt);
    });

    run_stage("simulate", [&] {
      const auto ifm = generate_ifm(layer, m.seed, i);
      auto sim = simulate_layer(layer, enc, ifm, cand_plan, m.workload, arch);
      const auto golden = relu_pool(conv_golden(ifm, weights[i], layer).ofm, layer);
      LayerCheck c{layer.name, tensor_hash(sim.ofm), tensor_hash(golden)};
      if (c.simulated_hash != c.golden_hash)
        throw std::runtime_error("OFM hash mismatch in layer '" + layer.name + "': simulator " +
                                 hex64(c.simulated_hash) + ", golden " + hex64(c.golden_hash));
      checks_csv += layer.name + "," + hex64(c.simulated_hash) + "," + hex64(c.golden_hash) + "\n";
      result.checks.push_back(c);
      cand_cycles.push_back(std::move(sim.cycles));
      base_cycles.push_back(
          simulate_layer(layer, enc, ifm, base_plan, base_mode, arch, SimOptions{false}).cycles);
    });
  }

  run_stage("report", [&] {
    const Precision prec = net.layers.empty() ? Precision::Int16 : net.layers.front().precision;
    const auto cand_net = aggregate_cycles(cand_cycles, arch);
    const auto base_net = aggregate_cycles(base_cycles, arch);
    result.candidate = summarize(net.name, prec, m.workload, cand_net, cand_traffic, arch);
    result.baseline = summarize(net.name, prec, base_mode, base_net, base_traffic, arch);
    result.ratios = compare_runs(result.candidate, result.baseline);

    staging->write("plan.csv", plan_csv(net, arch, weight_format_for(m.workload)));
    std::string cycles = cycles_csv_header();
    for (const auto& c : cand_cycles) cycles += cycles_csv_row(c, m.workload);
    for (const auto& c : base_cycles) cycles += cycles_csv_row(c, base_mode);
    staging->write("cycles.csv", cycles);
    staging->write("traffic.csv", traffic_csv_header() + traffic_rows);
    staging->write("energy.csv", energy_csv({result.candidate, result.baseline}));
    staging->write("ratios.csv", ratios_csv(result.candidate, result.baseline, result.ratios));
    staging->write("ofm_check.csv", checks_csv);

    nlohmann::ordered_json j;
    j["network"] = net.name;
    j["weights"] = m.weights_file ? nlohmann::ordered_json(m.weights_file->filename().string())
                                  : nlohmann::ordered_json("seed");
    j["seed"] = m.seed;
    j["arch"] = arch_to_json(arch);
    j["candidate"] = run_summary_to_json(result.candidate);
    j["candidate"]["frames_per_second"] = cand_net.frames_per_second;
    j["baseline"] = run_summary_to_json(result.baseline);
    j["baseline"]["frames_per_second"] = base_net.frames_per_second;
    j["ratios"] = ratios_to_json(result.ratios);
    j["ofm_check"] = {{"layers", result.checks.size()}, {"mismatches", 0}};
    auto& layers = j["layers"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < cand_cycles.size(); ++i)
      layers.push_back({{"name", cand_cycles[i].layer},
                        {"candidate", cycle_report_to_json(cand_cycles[i])},
                        {"baseline", cycle_report_to_json(base_cycles[i])},
                        {"ofm_hash", hex64(result.checks[i].simulated_hash)}});
    staging->write("summary.json", j.dump(1) + "\n");
  });

  run_stage("output", [&] { staging->commit(); });
  result.files = staging->files();
  return result;
}

}  // namespace sbsim
