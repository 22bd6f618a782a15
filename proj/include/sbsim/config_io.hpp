#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "sbsim/arch.hpp"
#include "sbsim/layer.hpp"

namespace sbsim {

// Network configs are JSON documents whose layer objects mirror LayerSpec.
// Top-level "precision" and "n_nzb_max" act as defaults for every layer.
NetworkSpec parse_network(const nlohmann::json& doc);
nlohmann::json network_to_json(const NetworkSpec& net);
NetworkSpec load_network(const std::filesystem::path& path);

ArchConfig parse_arch(const nlohmann::json& doc);
nlohmann::json arch_to_json(const ArchConfig& arch);
ArchConfig load_arch(const std::filesystem::path& path);

// Directory holding bundled configs; SBSIM_CONFIG_DIR overrides the build-time default.
std::filesystem::path config_dir();

// Accepts a path to a JSON file or the name of a bundled network ("alexnet").
NetworkSpec resolve_network(const std::string& name_or_path);

Precision parse_precision(int bits);

}  // namespace sbsim
