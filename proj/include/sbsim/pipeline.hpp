#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sbsim/arch.hpp"
#include "sbsim/error.hpp"
#include "sbsim/layer.hpp"
#include "sbsim/metrics.hpp"
#include "sbsim/systolic.hpp"
#include "sbsim/weight_gen.hpp"

namespace sbsim {

/// Failure inside one pipeline stage; exit_code is 2 for validation
/// problems and 3 for everything else.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& message, int exit_code)
      : std::runtime_error(stage + ": " + message), stage_(std::move(stage)), exit_code_(exit_code) {}
  const std::string& stage() const { return stage_; }
  int exit_code() const { return exit_code_; }

 private:
  std::string stage_;
  int exit_code_;
};

/// Runs f, rethrowing failures as StageError tagged with `stage`.
template <typename F>
auto run_stage(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const ValidationError& e) {
    throw StageError(stage, e.what(), 2);
  } catch (const std::exception& e) {
    throw StageError(stage, e.what(), 3);
  }
}

struct RunManifest {
  std::string network;  // bundled name or JSON path
  // Weights come from this file when set, otherwise from `seed`. The seed
  // also drives the synthetic IFMs.
  std::optional<std::filesystem::path> weights_file;
  std::uint64_t seed = 1;
  WeightDistribution distribution = WeightDistribution::Uniform;
  std::vector<double> profile;
  std::optional<std::filesystem::path> arch_path;
  std::optional<Precision> precision;
  WorkloadMode workload = WorkloadMode::SparseBalanced;
  std::optional<int> n_max;
  std::filesystem::path out_dir;
};

struct LayerCheck {
  std::string layer;
  std::uint64_t simulated_hash = 0;
  std::uint64_t golden_hash = 0;
};

struct PipelineResult {
  RunSummary candidate;
  RunSummary baseline;
  RatioTable ratios;
  std::vector<LayerCheck> checks;
  std::vector<std::filesystem::path> files;  // relative to out_dir
};

/// Forces every layer to `precision` and/or `n_max` when given.
NetworkSpec apply_overrides(NetworkSpec net, std::optional<Precision> precision, std::optional<int> n_max);

ArchConfig load_arch_or_default(const std::optional<std::filesystem::path>& path);

/// Throws ValidationError listing every diagnostic when the network is invalid.
void require_valid(const NetworkSpec& net, const ArchConfig& arch);

std::filesystem::path encoded_layer_path(const std::filesystem::path& dir, std::size_t index, const std::string& name);

/// validate, quantize, encode, plan, simulate (candidate workload plus the
/// dense baseline) and report. Every simulated OFM is checked against the
/// golden model. Outputs are staged and moved into out_dir only on success;
/// any failure throws StageError and leaves nothing from this run behind.
PipelineResult run_pipeline(const RunManifest& m);

}  // namespace sbsim
