// sbsim command-line entry point.
//
// Exit codes: 0 ok, 1 usage, 2 validation, 3 runtime.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sbsim/checks.hpp"
#include "sbsim/config_io.hpp"
#include "sbsim/encoder.hpp"
#include "sbsim/io.hpp"
#include "sbsim/metrics.hpp"
#include "sbsim/pipeline.hpp"
#include "sbsim/quantizer.hpp"
#include "sbsim/reference.hpp"
#include "sbsim/report_io.hpp"
#include "sbsim/systolic.hpp"
#include "sbsim/weight_file.hpp"
#include "sbsim/weight_gen.hpp"

namespace fs = std::filesystem;
using namespace sbsim;

namespace {

struct Globals {
  std::string arch;
  std::string mode;
  std::string workload = "balanced";
  std::uint64_t seed = 1;
  std::string out;
  std::string net;
  std::optional<int> n_max;
};

std::optional<fs::path> arch_path(const Globals& g) {
  if (g.arch.empty()) return std::nullopt;
  return fs::path(g.arch);
}

std::optional<Precision> mode_precision(const Globals& g) {
  if (g.mode.empty()) return std::nullopt;
  return g.mode == "8b" ? Precision::Int8 : Precision::Int16;
}

NetworkSpec load_net(const Globals& g, const ArchConfig& arch) {
  if (g.net.empty()) throw ValidationError("--net is required");
  auto net = apply_overrides(resolve_network(g.net), mode_precision(g), g.n_max);
  require_valid(net, arch);
  return net;
}

std::vector<double> parse_profile(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError("bad NNZB profile entry '" + item + "'");
    }
  }
  return out;
}

WeightDistribution parse_distribution(const std::string& s) {
  return s == "profile" ? WeightDistribution::Profile : WeightDistribution::Uniform;
}

void print_lines(const std::string& text) { std::fputs(text.c_str(), stdout); }

int cmd_gen_weights(const Globals& g, const std::string& dist, const std::string& profile) {
  const auto arch = run_stage("ingest", [&] { return load_arch_or_default(arch_path(g)); });
  const auto net = run_stage("ingest", [&] { return load_net(g, arch); });
  run_stage("gen-weights", [&] {
    if (g.out.empty()) throw ValidationError("--out is required");
    const auto weights = generate_network_weights(net, g.seed, parse_distribution(dist), parse_profile(profile));
    write_weight_file(g.out, weights);
    std::printf("wrote %zu layers to %s\n", weights.size(), g.out.c_str());
  });
  return 0;
}

int cmd_quantize(const Globals& g, const std::string& weights_path, const std::string& stats_path) {
  const auto arch = run_stage("ingest", [&] { return load_arch_or_default(arch_path(g)); });
  const auto net = run_stage("ingest", [&] { return load_net(g, arch); });
  auto weights = run_stage("ingest", [&] { return read_weight_file(weights_path, net); });
  run_stage("quantize", [&] {
    if (g.out.empty()) throw ValidationError("--out is required");
    std::vector<QuantStats> stats;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      auto q = quantize_tensor(weights[i], net.layers[i].n_nzb_max, static_cast<int>(i));
      weights[i] = std::move(q.tensor);
      stats.push_back(std::move(q.stats));
    }
    const auto csv = quant_stats_csv(net, stats);
    if (!stats_path.empty()) {
      write_file_atomic(stats_path, csv);
    } else {
      print_lines(csv);
    }
    write_weight_file(g.out, weights);
  });
  return 0;
}

int cmd_encode(const Globals& g, const std::string& weights_path) {
  const auto arch = run_stage("ingest", [&] { return load_arch_or_default(arch_path(g)); });
  const auto net = run_stage("ingest", [&] { return load_net(g, arch); });
  const auto weights = run_stage("ingest", [&] { return read_weight_file(weights_path, net); });
  run_stage("encode", [&] {
    if (g.out.empty()) throw ValidationError("--out is required");
    // Encode everything before touching the output directory.
    std::vector<EncodedLayer> layers;
    for (std::size_t i = 0; i < weights.size(); ++i) layers.push_back(encode_layer(weights[i], net.layers[i].n_nzb_max));
    fs::create_directories(g.out);
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const auto path = encoded_layer_path(g.out, i, net.layers[i].name);
      write_encoded_layer(path, layers[i]);
      std::printf("%s: %zu weights, %llu bits\n", path.string().c_str(), layers[i].weight_count(),
                  static_cast<unsigned long long>(layers[i].total_bits()));
    }
  });
  return 0;
}

int cmd_plan(const Globals& g) {
  const auto arch = run_stage("ingest", [&] { return load_arch_or_default(arch_path(g)); });
  const auto net = run_stage("ingest", [&] { return load_net(g, arch); });
  run_stage("plan", [&] {
    const auto csv = plan_csv(net, arch, weight_format_for(parse_workload(g.workload)));
    if (g.out.empty()) {
      print_lines(csv);
    } else {
      write_file_atomic(g.out, csv);
    }
  });
  return 0;
}

int cmd_simulate(const Globals& g, const std::string& encoded_dir, bool timing_only) {
  const auto arch = run_stage("ingest", [&] { return load_arch_or_default(arch_path(g)); });
  const auto net = run_stage("ingest", [&] { return load_net(g, arch); });
  const auto mode = run_stage("ingest", [&] { return parse_workload(g.workload); });
  if (g.out.empty()) throw StageError("ingest", "--out is required", 2);

  std::string cycles = cycles_csv_header();
  std::string traffic_rows = traffic_csv_header();
  TrafficReport traffic;
  std::vector<CycleReport> reports;
  auto layers = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const auto& layer = net.layers[i];
    const auto enc =
        run_stage("ingest", [&] { return read_encoded_layer(encoded_layer_path(encoded_dir, i, layer.name)); });
    run_stage("simulate", [&] {
      const auto plan = plan_layer(layer, arch, mode);
      const auto t = dram_traffic(layer, plan, *plan.dataflow, weight_format_for(mode));
      traffic += t;
      traffic_rows += traffic_csv_row(layer.name, mode, *plan.dataflow, t);
      nlohmann::ordered_json row = {{"name", layer.name}, {"dataflow", to_string(*plan.dataflow)}};
      if (timing_only) {
        reports.push_back(simulate_layer(layer, enc, FixedTensor(), plan, mode, arch, SimOptions{false}).cycles);
      } else {
        const auto ifm = generate_ifm(layer, g.seed, i);
        auto sim = simulate_layer(layer, enc, ifm, plan, mode, arch);
        const auto golden = relu_pool(conv_golden(ifm, decode_layer(enc), layer).ofm, layer);
        if (!(sim.ofm == golden))
          throw std::runtime_error("OFM mismatch against the golden model in layer '" + layer.name + "'");
        row["ofm_hash"] = hex64(tensor_hash(sim.ofm));
        reports.push_back(std::move(sim.cycles));
      }
      row["cycles"] = cycle_report_to_json(reports.back());
      row["traffic"] = traffic_to_json(t);
      layers.push_back(std::move(row));
      cycles += cycles_csv_row(reports.back(), mode);
    });
  }
  run_stage("report", [&] {
    const auto totals = aggregate_cycles(reports, arch);
    const auto summary = summarize(net.name, net.layers.front().precision, mode, totals, traffic, arch);
    auto j = run_summary_to_json(summary);
    j["frames_per_second"] = totals.frames_per_second;
    j["layers"] = std::move(layers);
    fs::create_directories(g.out);
    write_file_atomic(fs::path(g.out) / "cycles.csv", cycles);
    write_file_atomic(fs::path(g.out) / "traffic.csv", traffic_rows);
    write_file_atomic(fs::path(g.out) / "simulate.json", j.dump(1) + "\n");
    std::printf("%s %s: %llu cycles, %.3f frame/s\n", net.name.c_str(), to_string(mode),
                static_cast<unsigned long long>(totals.total_cycles), totals.frames_per_second);
  });
  return 0;
}

RunSummary read_summary(const std::string& path, const ArchConfig& arch) {
  const auto bytes = read_file_bytes(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
  auto s = run_summary_from_json(j);
  s.energy = energy_report(s.total_cycles, s.traffic.total_bits, arch, s.precision);
  return s;
}

int cmd_report(const Globals& g, const std::string& run_path, const std::string& baseline_path) {
  const auto arch = run_stage("ingest", [&] { return load_arch_or_default(arch_path(g)); });
  const auto run = run_stage("ingest", [&] { return read_summary(run_path, arch); });
  std::optional<RunSummary> base;
  if (!baseline_path.empty()) base = run_stage("ingest", [&] { return read_summary(baseline_path, arch); });
  run_stage("report", [&] {
    std::vector<RunSummary> runs{run};
    if (base) runs.push_back(*base);
    const auto energy = energy_csv(runs);
    nlohmann::ordered_json j;
    j["run"] = run_summary_to_json(run);
    std::string ratios;
    if (base) {
      const auto r = compare_runs(run, *base);
      j["baseline"] = run_summary_to_json(*base);
      j["ratios"] = ratios_to_json(r);
      ratios = ratios_csv(run, *base, r);
    }
    if (g.out.empty()) {
      print_lines(energy);
      print_lines(ratios);
      return;
    }
    fs::create_directories(g.out);
    write_file_atomic(fs::path(g.out) / "energy.csv", energy);
    if (base) write_file_atomic(fs::path(g.out) / "ratios.csv", ratios);
    write_file_atomic(fs::path(g.out) / "report.json", j.dump(1) + "\n");
    print_lines(energy);
    print_lines(ratios);
  });
  return 0;
}

int cmd_check(const Globals& g, int layers) {
  const auto results = run_stage("check", [&] { return run_checks(g.seed, layers); });
  std::uint64_t failed = 0;
  for (const auto& r : results) {
    std::printf("%-36s passed %llu failed %llu\n", r.name.c_str(), static_cast<unsigned long long>(r.passed),
                static_cast<unsigned long long>(r.failed));
    failed += r.failed;
  }
  std::printf("%s\n", failed == 0 ? "all checks passed" : "CHECKS FAILED");
  return failed == 0 ? 0 : 3;
}

int cmd_run(const Globals& g, const std::string& weights_path, const std::string& dist, const std::string& profile) {
  RunManifest m;
  m.network = g.net;
  if (!weights_path.empty()) m.weights_file = weights_path;
  m.seed = g.seed;
  m.arch_path = arch_path(g);
  m.precision = mode_precision(g);
  m.n_max = g.n_max;
  m.out_dir = g.out;
  run_stage("ingest", [&] {
    if (g.net.empty()) throw ValidationError("--net is required");
    if (g.out.empty()) throw ValidationError("--out is required");
    m.workload = parse_workload(g.workload);
    m.distribution = parse_distribution(dist);
    m.profile = parse_profile(profile);
  });
  const auto r = run_pipeline(m);
  std::printf("%s: %s %llu cycles, dense %llu cycles, speedup %.4f, OFM checks %zu/%zu\n", r.candidate.network.c_str(),
              to_string(r.candidate.mode), static_cast<unsigned long long>(r.candidate.total_cycles),
              static_cast<unsigned long long>(r.baseline.total_cycles), r.ratios.speedup, r.checks.size(),
              r.checks.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bit-sparse systolic accelerator simulator"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--arch", g.arch, "Arch config JSON (default: built-in 32x32 array)");
  app.add_option("--mode", g.mode, "Force every layer to 16b or 8b")->check(CLI::IsMember({"16b", "8b"}));
  app.add_option("--workload", g.workload, "dense, imbalanced or balanced")
      ->check(CLI::IsMember({"dense", "imbalanced", "balanced"}));
  app.add_option("--seed", g.seed, "Seed for generated weights and IFMs");
  app.add_option("--out", g.out, "Output file or directory");
  app.add_option("--net", g.net, "Bundled network name or network config JSON");
  app.add_option("--nmax", g.n_max, "Override every layer's n_nzb_max")->check(CLI::Range(1, 16));

  std::string weights, stats, encoded, run_path, baseline, dist = "uniform", profile;
  bool timing_only = false;
  int check_layers = 40;

  auto* gen = app.add_subcommand("gen-weights", "Write deterministic random weights");
  gen->add_option("--distribution", dist, "uniform or profile")->check(CLI::IsMember({"uniform", "profile"}));
  gen->add_option("--profile", profile, "Comma-separated NNZB histogram (entry k weights NNZB=k)");

  auto* quant = app.add_subcommand("quantize", "Cap every weight's nonzero bits at n_max");
  quant->add_option("--weights", weights, "Input weight file")->required();
  quant->add_option("--stats", stats, "Write per-layer stats CSV here instead of stdout");

  auto* enc = app.add_subcommand("encode", "Encode quantized weights, one file per layer");
  enc->add_option("--weights", weights, "Quantized weight file")->required();

  auto* plan = app.add_subcommand("plan", "Print tiling and per-dataflow DRAM traffic as CSV");

  auto* sim = app.add_subcommand("simulate", "Simulate encoded layers; writes cycles.csv and simulate.json");
  sim->add_option("--encoded", encoded, "Directory written by encode")->required();
  sim->add_flag("--timing-only", timing_only, "Skip the functional model and golden check");

  auto* rep = app.add_subcommand("report", "Energy and ratio tables from simulate.json files");
  rep->add_option("--run", run_path, "simulate.json of the run")->required();
  rep->add_option("--baseline", baseline, "simulate.json of the baseline");

  auto* chk = app.add_subcommand("check", "Run the oracle equivalence suites");
  chk->add_option("--layers", check_layers, "Random layers per suite")->check(CLI::Range(1, 100000));

  auto* run = app.add_subcommand("run", "Full pipeline: quantize, encode, plan, simulate, report");
  run->add_option("--weights", weights, "Weight file (default: generate from --seed)");
  run->add_option("--distribution", dist, "uniform or profile")->check(CLI::IsMember({"uniform", "profile"}));
  run->add_option("--profile", profile, "Comma-separated NNZB histogram");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*gen) return cmd_gen_weights(g, dist, profile);
    if (*quant) return cmd_quantize(g, weights, stats);
    if (*enc) return cmd_encode(g, weights);
    if (*plan) return cmd_plan(g);
    if (*sim) return cmd_simulate(g, encoded, timing_only);
    if (*rep) return cmd_report(g, run_path, baseline);
    if (*chk) return cmd_check(g, check_layers);
    if (*run) return cmd_run(g, weights, dist, profile);
  } catch (const StageError& e) {
    std::fprintf(stderr, "sbsim: [%s] %s\n", e.stage().c_str(), e.what() + e.stage().size() + 2);
    return e.exit_code();
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "sbsim: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "sbsim: %s\n", e.what());
    return 3;
  }
  return 1;
}
