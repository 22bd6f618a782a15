#include "sbsim/reference.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "sbsim/error.hpp"

namespace sbsim {

void Psum::add(std::int64_t v) {
  const std::int64_t wide = value_ + v;
  value_ = wrap_signed(wide, bits_);
  if (value_ != wide) {
    ++overflows_;
    balance_ += (wide - value_) >> bits_;
  }
}

MacResult bitserial_mac(std::int32_t i, std::int32_t w, Precision precision) {
  const int n = bits_of(precision);
  const std::uint64_t mag = magnitude(w);
  const std::int64_t x = w < 0 ? -std::int64_t{i} : std::int64_t{i};
  std::int64_t acc = 0;
  for (int b = 0; b < n; ++b) {
    if ((mag >> b) & 1u) acc += x * (std::int64_t{1} << b);
  }
  return {acc, n};
}

MacResult sparse_mac(std::int32_t i, const EncodedWeight& e, int n_max) {
  const std::int64_t x = e.sign ? -std::int64_t{i} : std::int64_t{i};
  std::int64_t acc = 0;
  for (int k = 0; k < n_max; ++k) {
    if (e.valid(k)) acc += x * (std::int64_t{1} << e.positions[k]);
  }
  return {acc, n_max};
}

std::int32_t write_out(std::int64_t psum, const LayerSpec& layer) {
  const std::int64_t shifted = psum >> layer.ofm_shift;
  const int bits = bits_of(layer.precision);
  return static_cast<std::int32_t>(layer.saturate ? saturate_signed(shifted, bits) : wrap_signed(shifted, bits));
}

void check_conv_shapes(const FixedTensor& ifm, std::span<const std::size_t> wd, Precision weight_precision,
                       const LayerSpec& layer) {
  const auto want_ifm = layer.ifm_dims();
  const auto want_w = layer.weight_dims();
  const auto& id = ifm.dims();
  if (id.size() != 3 || !std::equal(id.begin(), id.end(), want_ifm.begin()))
    throw ValidationError("IFM shape " + dims_to_string(id) + " does not match layer '" + layer.name + "' (" +
                          dims_to_string(want_ifm) + ")");
  if (wd.size() != 4 || !std::equal(wd.begin(), wd.end(), want_w.begin()))
    throw ValidationError("weight shape " + dims_to_string(wd) + " does not match layer '" + layer.name + "' (" +
                          dims_to_string(want_w) + ")");
  if (ifm.bitwidth() != layer.precision || weight_precision != layer.precision)
    throw ValidationError("operand precision does not match layer '" + layer.name + "'");
  output_dims(layer);
}

ConvOutput conv_golden(const FixedTensor& ifm, const FixedTensor& w, const LayerSpec& layer) {
  check_conv_shapes(ifm, w.dims(), w.bitwidth(), layer);
  const auto od = output_dims(layer);
  const std::size_t ho = od.h, wo = od.w, hi = layer.h_i, wi = layer.w_i;
  const std::size_t hk = layer.h_k, wk = layer.w_k, s = layer.stride;
  const std::size_t nic = layer.n_ic, noc = layer.n_oc;
  const int pbits = psum_bits(layer.precision);
  const auto in = ifm.values();
  const auto wt = w.values();

  ConvOutput out;
  std::vector<std::int16_t> ofm(noc * ho * wo);
  std::vector<std::int64_t> acc(ho * wo);
  for (std::size_t o = 0; o < noc; ++o) {
    std::fill(acc.begin(), acc.end(), 0);
    for (std::size_t i = 0; i < nic; ++i) {
      const std::int16_t* plane = in.data() + i * hi * wi;
      for (std::size_t a = 0; a < hk; ++a) {
        for (std::size_t b = 0; b < wk; ++b) {
          const std::int32_t wv = wt[((o * nic + i) * hk + a) * wk + b];
          if (wv == 0) continue;
          for (std::size_t y = 0; y < ho; ++y) {
            const std::int16_t* row = plane + (y * s + a) * wi + b;
            std::int64_t* dst = acc.data() + y * wo;
            for (std::size_t x = 0; x < wo; ++x) dst[x] += std::int64_t(wv * std::int32_t(row[x * s]));
          }
        }
      }
    }
    for (std::size_t p = 0; p < ho * wo; ++p) {
      const std::int64_t ps = wrap_signed(acc[p], pbits);
      if (ps != acc[p]) ++out.wraps.psum_wrapped;
      const std::int32_t v = write_out(ps, layer);
      if (v != (ps >> layer.ofm_shift)) ++out.wraps.ofm_wrapped;
      ofm[o * ho * wo + p] = static_cast<std::int16_t>(v);
    }
  }
  out.ofm = FixedTensor::adopt({noc, ho, wo}, layer.precision, std::move(ofm));
  return out;
}

FixedTensor sparse_conv_golden(const FixedTensor& ifm, const EncodedLayer& enc, const LayerSpec& layer) {
  check_conv_shapes(ifm, enc.dims(), enc.precision(), layer);
  const auto od = output_dims(layer);
  const std::size_t ho = od.h, wo = od.w, hi = layer.h_i, wi = layer.w_i;
  const std::size_t hk = layer.h_k, wk = layer.w_k, s = layer.stride;
  const std::size_t nic = layer.n_ic, noc = layer.n_oc;
  const int n_max = enc.n_max();
  const auto in = ifm.values();

  std::vector<std::int16_t> ofm(noc * ho * wo);
  for (std::size_t o = 0; o < noc; ++o) {
    for (std::size_t y = 0; y < ho; ++y) {
      for (std::size_t x = 0; x < wo; ++x) {
        Psum psum(psum_bits(layer.precision));
        for (std::size_t i = 0; i < nic; ++i) {
          for (std::size_t a = 0; a < hk; ++a) {
            for (std::size_t b = 0; b < wk; ++b) {
              const auto e = enc.weight(((o * nic + i) * hk + a) * wk + b);
              psum.add(sparse_mac(in[(i * hi + y * s + a) * wi + x * s + b], e, n_max).value);
            }
          }
        }
        ofm[(o * ho + y) * wo + x] = static_cast<std::int16_t>(write_out(psum.value(), layer));
      }
    }
  }
  return FixedTensor::adopt({noc, ho, wo}, layer.precision, std::move(ofm));
}

FixedTensor relu_pool(const FixedTensor& ofm, const LayerSpec& layer) {
  const auto od = output_dims(layer);
  const auto& d = ofm.dims();
  if (d.size() != 3 || d[0] != std::size_t(layer.n_oc) || d[1] != std::size_t(od.h) || d[2] != std::size_t(od.w))
    throw ValidationError("OFM shape " + dims_to_string(d) + " does not match layer '" + layer.name + "'");
  const auto pd = pooled_dims(layer);
  const std::size_t c = d[0], h = d[1], w = d[2];
  const auto src = ofm.values();

  if (!layer.pool) {
    if (!layer.post_relu) return ofm;
    std::vector<std::int16_t> out(src.begin(), src.end());
    for (auto& v : out) v = std::max<std::int16_t>(v, 0);
    return FixedTensor::adopt({c, h, w}, ofm.bitwidth(), std::move(out));
  }

  const std::size_t win = layer.pool->window, st = layer.pool->stride;
  const std::size_t ph = pd.h, pw = pd.w;
  std::vector<std::int16_t> out(c * ph * pw);
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t y = 0; y < ph; ++y) {
      for (std::size_t x = 0; x < pw; ++x) {
        std::int16_t m = src[(ch * h + y * st) * w + x * st];
        for (std::size_t a = 0; a < win; ++a)
          for (std::size_t b = 0; b < win; ++b) m = std::max(m, src[(ch * h + y * st + a) * w + x * st + b]);
        if (layer.post_relu) m = std::max<std::int16_t>(m, 0);
        out[(ch * ph + y) * pw + x] = m;
      }
    }
  }
  return FixedTensor::adopt({c, ph, pw}, ofm.bitwidth(), std::move(out));
}

}  // namespace sbsim
