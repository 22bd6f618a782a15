#include "sbsim/checks.hpp"

#include <random>

#include "sbsim/encoder.hpp"
#include "sbsim/quantizer.hpp"
#include "sbsim/reference.hpp"
#include "sbsim/systolic.hpp"
#include "sbsim/weight_gen.hpp"

namespace sbsim {

namespace {

int pick(std::mt19937_64& rng, int lo, int hi) { return lo + static_cast<int>(uniform_below(rng, std::uint64_t(hi - lo + 1))); }

LayerSpec random_layer(std::mt19937_64& rng) {
  LayerSpec l;
  l.name = "random";
  l.precision = (rng() & 1u) ? Precision::Int16 : Precision::Int8;
  l.n_nzb_max = pick(rng, 1, bits_of(l.precision) / 2);
  l.n_ic = pick(rng, 1, 4);
  l.n_oc = pick(rng, 1, 4);
  if (pick(rng, 0, 4) == 0) {
    l.kind = LayerKind::FC;
    l.n_ic = pick(rng, 1, 12);
    l.post_relu = (rng() & 1u) != 0;
    return l;
  }
  l.h_i = pick(rng, 1, 8);
  l.w_i = pick(rng, 1, 8);
  l.h_k = pick(rng, 1, l.h_i);
  l.w_k = pick(rng, 1, l.w_i);
  l.stride = pick(rng, 1, 3);
  l.post_relu = (rng() & 1u) != 0;
  const auto od = output_dims(l);
  if ((rng() & 1u) && od.h >= 2 && od.w >= 2) l.pool = PoolSpec{2, pick(rng, 1, 2)};
  l.ofm_shift = pick(rng, 0, 4);
  return l;
}

struct Fixture {
  LayerSpec layer;
  FixedTensor ifm;
  FixedTensor quantized;
  EncodedLayer enc;
};

Fixture random_fixture(std::mt19937_64& rng, std::uint64_t seed, std::size_t index) {
  Fixture f;
  f.layer = random_layer(rng);
  const auto w = generate_weights(f.layer, seed, index, WeightDistribution::Uniform);
  f.quantized = quantize_tensor(w, f.layer.n_nzb_max).tensor;
  f.enc = encode_layer(f.quantized, f.layer.n_nzb_max);
  f.ifm = generate_ifm(f.layer, seed, index);
  return f;
}

void tally(CheckResult& r, bool ok) { ok ? ++r.passed : ++r.failed; }

}  // namespace

std::vector<CheckResult> run_checks(std::uint64_t seed, int random_layers) {
  std::vector<CheckResult> out;

  CheckResult bs{"bitserial_mac_exhaustive_8bit"};
  for (int i = -128; i < 128; ++i)
    for (int w = -128; w < 128; ++w) {
      const auto r = bitserial_mac(i, w, Precision::Int8);
      tally(bs, r.value == std::int64_t(i) * w && r.cycles == 8);
    }
  out.push_back(bs);

  CheckResult sm{"sparse_mac_exhaustive_8bit"};
  for (int n = 1; n <= 8; ++n)
    for (int w = -128; w < 128; ++w) {
      const auto q = quantize_weight(w, n);
      const auto e = encode_weight(q, Precision::Int8, n);
      for (int i = -128; i < 128; ++i) {
        const auto r = sparse_mac(i, e, n);
        tally(sm, r.value == std::int64_t(i) * q && r.cycles == n);
      }
    }
  out.push_back(sm);

  CheckResult sg{"sparse_conv_golden_vs_conv_golden"};
  CheckResult sim{"simulate_layer_vs_golden"};
  CheckResult ev{"event_model_vs_simulate_layer"};
  CheckResult rt{"encoding_round_trip"};
  std::mt19937_64 rng(seed);
  ArchConfig arch;
  arch.n_pe = 4;
  arch.w_is = 3;
  arch.h_is = 3;
  for (int k = 0; k < random_layers; ++k) {
    const auto f = random_fixture(rng, seed, std::size_t(k));
    const auto golden = conv_golden(f.ifm, f.quantized, f.layer).ofm;
    tally(sg, sparse_conv_golden(f.ifm, f.enc, f.layer) == golden);
    const auto expected = relu_pool(golden, f.layer);
    for (auto mode : {WorkloadMode::DenseBitSerial, WorkloadMode::SparseImbalanced, WorkloadMode::SparseBalanced}) {
      const auto plan = plan_layer(f.layer, arch, mode);
      const auto a = simulate_layer(f.layer, f.enc, f.ifm, plan, mode, arch);
      tally(sim, a.ofm == expected);
      const auto e = simulate_layer_events(f.layer, f.enc, f.ifm, plan, mode, arch);
      tally(ev, e.ofm == expected && e.cycles == a.cycles);
    }
    const LayerMeta meta{f.enc.precision(), f.enc.n_max(), f.enc.dims()};
    tally(rt, unpack_layer(pack_layer(f.enc), meta) == f.enc &&
                  deserialize_encoded_layer(serialize_encoded_layer(f.enc)) == f.enc &&
                  decode_layer(f.enc) == f.quantized);
  }
  out.push_back(sg);
  out.push_back(sim);
  out.push_back(ev);
  out.push_back(rt);
  return out;
}

}  // namespace sbsim
