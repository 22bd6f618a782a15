#include "sbsim/config_io.hpp"

#include <cstdlib>
#include <fstream>

#include "sbsim/error.hpp"

#ifndef SBSIM_DEFAULT_CONFIG_DIR
#define SBSIM_DEFAULT_CONFIG_DIR "configs"
#endif

namespace sbsim {

using nlohmann::json;

Precision parse_precision(int bits) {
  if (bits == 8) return Precision::Int8;
  if (bits == 16) return Precision::Int16;
  throw ValidationError("precision must be 8 or 16, got " + std::to_string(bits));
}

namespace {

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string("field '") + key + "' has the wrong type");
  }
}

LayerSpec parse_layer(const json& j, Precision default_prec, int default_nmax, std::size_t index) {
  if (!j.is_object()) throw ValidationError("layer " + std::to_string(index) + " is not an object");
  LayerSpec l;
  l.name = get_or<std::string>(j, "name", "layer" + std::to_string(index));
  const auto kind = get_or<std::string>(j, "kind", "conv");
  if (kind == "conv" || kind == "CONV") {
    l.kind = LayerKind::Conv;
  } else if (kind == "fc" || kind == "FC") {
    l.kind = LayerKind::FC;
  } else {
    throw ValidationError("layer " + std::to_string(index) + ": unknown kind '" + kind + "'");
  }
  l.n_ic = get_or(j, "n_ic", 1);
  l.n_oc = get_or(j, "n_oc", 1);
  l.h_i = get_or(j, "h_i", 1);
  l.w_i = get_or(j, "w_i", l.h_i);
  l.h_k = get_or(j, "h_k", 1);
  l.w_k = get_or(j, "w_k", l.h_k);
  l.stride = get_or(j, "stride", 1);
  l.precision = parse_precision(get_or(j, "precision", bits_of(default_prec)));
  l.n_nzb_max = get_or(j, "n_nzb_max", default_nmax > 0 ? default_nmax : bits_of(l.precision));
  l.post_relu = get_or(j, "post_relu", false);
  l.ofm_shift = get_or(j, "ofm_shift", 0);
  l.saturate = get_or(j, "saturate", false);
  l.branch = get_or(j, "branch", false);
  if (auto it = j.find("pool"); it != j.end() && !it->is_null()) {
    PoolSpec p;
    p.window = get_or(*it, "window", 2);
    p.stride = get_or(*it, "stride", p.window);
    l.pool = p;
  }
  return l;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace

NetworkSpec parse_network(const json& doc) {
  if (!doc.is_object()) throw ValidationError("network config must be an object");
  NetworkSpec net;
  net.name = get_or<std::string>(doc, "name", "network");
  const auto prec = parse_precision(get_or(doc, "precision", 16));
  const int nmax = get_or(doc, "n_nzb_max", 0);
  if (auto it = doc.find("input"); it != doc.end()) {
    auto dims = it->get<std::vector<int>>();
    if (dims.size() != 3) throw ValidationError("input must be [C, H, W]");
    net.input_dims = {dims[0], dims[1], dims[2]};
  }
  auto layers = doc.find("layers");
  if (layers == doc.end() || !layers->is_array()) throw ValidationError("network config needs a layers array");
  for (std::size_t i = 0; i < layers->size(); ++i) net.layers.push_back(parse_layer((*layers)[i], prec, nmax, i));
  if (doc.find("input") == doc.end() && !net.layers.empty()) {
    const auto& f = net.layers.front();
    net.input_dims = {f.n_ic, f.h_i, f.w_i};
  }
  return net;
}

json network_to_json(const NetworkSpec& net) {
  json layers = json::array();
  for (const auto& l : net.layers) {
    json j = {{"name", l.name},           {"kind", to_string(l.kind)},
              {"n_ic", l.n_ic},           {"n_oc", l.n_oc},
              {"h_i", l.h_i},             {"w_i", l.w_i},
              {"h_k", l.h_k},             {"w_k", l.w_k},
              {"stride", l.stride},       {"n_nzb_max", l.n_nzb_max},
              {"precision", bits_of(l.precision)}, {"post_relu", l.post_relu}};
    if (l.pool) j["pool"] = {{"window", l.pool->window}, {"stride", l.pool->stride}};
    if (l.ofm_shift) j["ofm_shift"] = l.ofm_shift;
    if (l.saturate) j["saturate"] = true;
    if (l.branch) j["branch"] = true;
    layers.push_back(std::move(j));
  }
  return {{"name", net.name},
          {"input", {net.input_dims[0], net.input_dims[1], net.input_dims[2]}},
          {"layers", std::move(layers)}};
}

NetworkSpec load_network(const std::filesystem::path& path) { return parse_network(read_json_file(path)); }

ArchConfig parse_arch(const json& doc) {
  if (!doc.is_object()) throw ValidationError("arch config must be an object");
  ArchConfig a;
  a.n_pe = get_or(doc, "n_pe", a.n_pe);
  a.w_is = get_or(doc, "w_is", a.w_is);
  a.h_is = get_or(doc, "h_is", a.h_is);
  a.ifm_weight_buffer_words = get_or(doc, "ifm_weight_buffer_words", a.ifm_weight_buffer_words);
  a.output_buffer_words = get_or(doc, "output_buffer_words", a.output_buffer_words);
  a.core_power_mw_16b = get_or(doc, "core_power_mw_16b", a.core_power_mw_16b);
  a.core_power_mw_8b = get_or(doc, "core_power_mw_8b", a.core_power_mw_8b);
  a.dram_energy_pj_per_bit = get_or(doc, "dram_energy_pj_per_bit", a.dram_energy_pj_per_bit);
  a.clock_hz = get_or(doc, "clock_hz", a.clock_hz);
  a.dram_bits_per_cycle = get_or(doc, "dram_bits_per_cycle", a.dram_bits_per_cycle);
  a.area_mm2 = get_or(doc, "area_mm2", a.area_mm2);
  return a;
}

json arch_to_json(const ArchConfig& a) {
  return {{"n_pe", a.n_pe},
          {"w_is", a.w_is},
          {"h_is", a.h_is},
          {"ifm_weight_buffer_words", a.ifm_weight_buffer_words},
          {"output_buffer_words", a.output_buffer_words},
          {"core_power_mw_16b", a.core_power_mw_16b},
          {"core_power_mw_8b", a.core_power_mw_8b},
          {"dram_energy_pj_per_bit", a.dram_energy_pj_per_bit},
          {"clock_hz", a.clock_hz},
          {"dram_bits_per_cycle", a.dram_bits_per_cycle},
          {"area_mm2", a.area_mm2}};
}

ArchConfig load_arch(const std::filesystem::path& path) { return parse_arch(read_json_file(path)); }

std::filesystem::path config_dir() {
  if (const char* env = std::getenv("SBSIM_CONFIG_DIR"); env && *env) return env;
  return SBSIM_DEFAULT_CONFIG_DIR;
}

NetworkSpec resolve_network(const std::string& name_or_path) {
  std::filesystem::path p(name_or_path);
  if (std::filesystem::is_regular_file(p)) return load_network(p);
  auto bundled = config_dir() / "networks" / (name_or_path + ".json");
  if (std::filesystem::is_regular_file(bundled)) return load_network(bundled);
  throw FormatError("no network config at '" + name_or_path + "' and no bundled network of that name");
}

}  // namespace sbsim
