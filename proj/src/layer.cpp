#include "sbsim/layer.hpp"

#include "sbsim/error.hpp"

namespace sbsim {

const char* to_string(LayerKind kind) { return kind == LayerKind::Conv ? "conv" : "fc"; }

std::string Diagnostic::to_string() const {
  std::string s = layer < 0 ? std::string("network") : "layer " + std::to_string(layer);
  if (!field.empty()) s += " [" + field + "]";
  return s + ": " + message;
}

std::int64_t ArchConfig::row_buffer_half_words() const {
  return n_pe > 0 ? ifm_weight_buffer_words / n_pe / 2 : 0;
}

std::vector<std::string> ArchConfig::check() const {
  std::vector<std::string> out;
  if (n_pe < 1) out.emplace_back("n_pe must be >= 1");
  if (w_is < 1 || h_is < 1) out.emplace_back("tile sizes must be >= 1");
  if (ifm_weight_buffer_words < 0 || output_buffer_words < 0)
    out.emplace_back("buffer capacities must be >= 0");
  if (core_power_mw_16b < 0 || core_power_mw_8b < 0) out.emplace_back("powers must be >= 0");
  if (dram_energy_pj_per_bit < 0) out.emplace_back("dram_energy_pj_per_bit must be >= 0");
  if (!(clock_hz > 0)) out.emplace_back("clock_hz must be > 0");
  if (dram_bits_per_cycle < 1) out.emplace_back("dram_bits_per_cycle must be >= 1");
  if (!(area_mm2 > 0)) out.emplace_back("area_mm2 must be > 0");
  return out;
}

OutputDims output_dims(const LayerSpec& layer) {
  if (layer.kind == LayerKind::FC) return {1, 1};
  if (layer.stride < 1) throw ValidationError("stride must be >= 1");
  if (layer.h_k > layer.h_i || layer.w_k > layer.w_i || layer.h_k < 1 || layer.w_k < 1)
    throw ValidationError("kernel exceeds input");
  return {(layer.h_i - layer.h_k) / layer.stride + 1, (layer.w_i - layer.w_k) / layer.stride + 1};
}

OutputDims pooled_dims(const LayerSpec& layer) {
  auto out = output_dims(layer);
  if (!layer.pool) return out;
  const auto& p = *layer.pool;
  if (p.window < 1 || p.stride < 1) throw ValidationError("pool window and stride must be >= 1");
  if (p.window > out.h || p.window > out.w) throw ValidationError("pooling window exceeds OFM");
  return {(out.h - p.window) / p.stride + 1, (out.w - p.window) / p.stride + 1};
}

std::vector<Diagnostic> validate_layer(const LayerSpec& l, int index) {
  std::vector<Diagnostic> d;
  auto add = [&](const char* field, std::string msg) { d.push_back({index, field, std::move(msg)}); };
  const int prec = bits_of(l.precision);

  if (l.n_ic < 1) add("n_ic", "must be >= 1");
  if (l.n_oc < 1) add("n_oc", "must be >= 1");
  if (l.stride < 1) add("stride", "must be >= 1");
  if (l.n_nzb_max < 1 || l.n_nzb_max > prec)
    add("n_nzb_max", "must be in [1, " + std::to_string(prec) + "], got " + std::to_string(l.n_nzb_max));
  if (l.ofm_shift < 0 || l.ofm_shift >= psum_bits(l.precision)) add("ofm_shift", "out of range");

  if (l.kind == LayerKind::FC) {
    if (l.h_k != 1 || l.w_k != 1) add("h_k", "FC requires 1×1 kernel");
    if (l.h_i != 1 || l.w_i != 1) add("h_i", "FC requires 1×1 input");
    if (l.pool) add("pool", "FC layers cannot pool");
    return d;
  }

  if (l.h_i < 1 || l.w_i < 1) add("h_i", "IFM extents must be >= 1");
  if (l.h_k < 1 || l.w_k < 1) add("h_k", "kernel extents must be >= 1");
  if (!d.empty()) return d;
  if (l.h_k > l.h_i || l.w_k > l.w_i) {
    add("h_k", "kernel exceeds input");
    return d;
  }
  if (l.pool) {
    const auto out = output_dims(l);
    if (l.pool->window < 1 || l.pool->stride < 1)
      add("pool", "window and stride must be >= 1");
    else if (l.pool->window > out.h || l.pool->window > out.w)
      add("pool", "pooling window exceeds OFM");
  }
  return d;
}

std::vector<Diagnostic> validate_network(const NetworkSpec& net, const ArchConfig& arch) {
  std::vector<Diagnostic> diags;
  for (auto& msg : arch.check()) diags.push_back({-1, "arch", msg});
  if (net.layers.empty()) diags.push_back({-1, "layers", "network has no layers"});

  // Producer shape: C, H, W of the previous stage (network input for layer 0).
  std::array<int, 3> prev = net.input_dims;
  bool prev_known = true;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const auto& l = net.layers[i];
    const int idx = static_cast<int>(i);
    auto layer_diags = validate_layer(l, idx);
    const bool layer_ok = layer_diags.empty();
    diags.insert(diags.end(), layer_diags.begin(), layer_diags.end());

    if (!l.branch && prev_known) {
      if (l.kind == LayerKind::FC) {
        const long flat = long(prev[0]) * prev[1] * prev[2];
        if (l.n_ic != flat)
          diags.push_back({idx, "n_ic",
                           "FC input " + std::to_string(l.n_ic) + " does not match flattened producer output " +
                               std::to_string(flat)});
      } else {
        if (l.n_ic != prev[0])
          diags.push_back({idx, "n_ic",
                           "expected " + std::to_string(prev[0]) + " input channels, got " + std::to_string(l.n_ic)});
        const int dh = l.h_i - prev[1];
        const int dw = l.w_i - prev[2];
        if (dh < 0 || dh > l.h_k - 1 || dw < 0 || dw > l.w_k - 1)
          diags.push_back({idx, "h_i",
                           "IFM " + std::to_string(l.h_i) + "x" + std::to_string(l.w_i) +
                               " does not chain from producer output " + std::to_string(prev[1]) + "x" +
                               std::to_string(prev[2])});
      }
    }

    if (layer_ok) {
      const auto out = pooled_dims(l);
      prev = {l.n_oc, out.h, out.w};
      prev_known = true;
    } else {
      prev_known = false;
    }
  }
  return diags;
}

}  // namespace sbsim
