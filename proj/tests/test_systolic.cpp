#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "sbsim/encoder.hpp"
#include "sbsim/error.hpp"
#include "sbsim/quantizer.hpp"
#include "sbsim/reference.hpp"
#include "sbsim/systolic.hpp"
#include "sbsim/weight_gen.hpp"

using namespace sbsim;

namespace {

constexpr WorkloadMode kModes[] = {WorkloadMode::DenseBitSerial, WorkloadMode::SparseImbalanced,
                                   WorkloadMode::SparseBalanced};

LayerSpec conv(int n_ic, int n_oc, int h, int k, Precision p, int n_max) {
  LayerSpec l;
  l.name = "c";
  l.n_ic = n_ic;
  l.n_oc = n_oc;
  l.h_i = l.w_i = h;
  l.h_k = l.w_k = k;
  l.precision = p;
  l.n_nzb_max = n_max;
  return l;
}

ArchConfig small_arch(int n_pe, int tile) {
  ArchConfig a;
  a.n_pe = n_pe;
  a.w_is = a.h_is = tile;
  return a;
}

struct Setup {
  EncodedLayer enc;
  FixedTensor ifm;
  FixedTensor quantized;
};

Setup setup(const LayerSpec& l, std::uint64_t seed) {
  Setup s;
  s.quantized = quantize_tensor(generate_weights(l, seed, 0, WeightDistribution::Uniform), l.n_nzb_max).tensor;
  s.enc = encode_layer(s.quantized, l.n_nzb_max);
  s.ifm = generate_ifm(l, seed, 0);
  return s;
}

}  // namespace

TEST_CASE("pe_step single lane") {
  PeState s;
  s.lane[0].psum = 140;
  auto n = pe_step(s, 5, WeightSlot{false, 6, true});
  CHECK(n.lane[0].psum == 460);
  CHECK_FALSE(n.gated());
  CHECK(n.cycles == 1);

  n = pe_step(n, 5, WeightSlot{false, 6, false});
  CHECK(n.lane[0].psum == 460);
  CHECK(n.gated());

  n = pe_step(n, 3, WeightSlot{true, 2, true});
  CHECK(n.lane[0].psum == 448);

  PeState w;
  w.lane[0].psum = max_signed(32);
  w = pe_step(w, 1, WeightSlot{false, 0, true});
  CHECK(w.lane[0].psum == min_signed(32));
}

TEST_CASE("pe_step dual lane") {
  PeState s;
  s.precision = Precision::Int8;
  s.lane[0].psum = 10;
  s.lane[1].psum = -7;
  const LaneInput in[] = {{3, {false, 2, true}}, {-2, {false, 0, true}}};
  const auto n = pe_step(s, in);
  CHECK(n.lane[0].psum == 10 + (3 << 2));
  CHECK(n.lane[1].psum == -7 - 2);
  CHECK(n.cycles == 1);

  // 16-bit lane wrap.
  PeState w;
  w.precision = Precision::Int8;
  w.lane[1].psum = 32767;
  const LaneInput one[] = {{0, {false, 0, false}}, {1, {false, 0, true}}};
  const auto m = pe_step(w, one);
  CHECK(m.lane[0].gated);
  CHECK(m.lane[1].psum == -32768);
}

TEST_CASE("simulate_column examples") {
  const int a[] = {4, 2};
  const auto t = simulate_column(a, WorkloadMode::SparseImbalanced, Precision::Int16, 4);
  CHECK(t.latency == 4);
  CHECK(t.idle == std::vector<int>{0, 2});

  const int b[] = {4, 4};
  const auto u = simulate_column(b, WorkloadMode::SparseBalanced, Precision::Int16, 4);
  CHECK(u.latency == 4);
  CHECK(u.idle == std::vector<int>{0, 0});

  const int c[] = {5};
  CHECK(simulate_column(c, WorkloadMode::DenseBitSerial, Precision::Int16, 5).latency == 16);

  const EncodedWeight e[] = {encode_weight(92, Precision::Int8, 4), encode_weight(80, Precision::Int8, 4)};
  const auto v = simulate_column(e, WorkloadMode::SparseImbalanced, Precision::Int8);
  CHECK(v.latency == 4);
  CHECK(v.idle == std::vector<int>{0, 2});
  CHECK(simulate_column(e, WorkloadMode::SparseBalanced, Precision::Int8).latency == 4);
  CHECK(simulate_column(e, WorkloadMode::DenseBitSerial, Precision::Int8).latency == 8);

  CHECK_THROWS_AS(simulate_column(std::span<const int>{}, WorkloadMode::SparseBalanced, Precision::Int8, 3),
                  ValidationError);
}

TEST_CASE("simulate_column agrees with the event model and orders the modes") {
  std::mt19937_64 rng(41);
  for (int k = 0; k < 2000; ++k) {
    const auto p = (rng() & 1u) ? Precision::Int8 : Precision::Int16;
    std::vector<int> col(1 + rng() % 32);
    for (auto& x : col) x = int(rng() % (bits_of(p) + 1));
    const int mx = *std::max_element(col.begin(), col.end());
    const int n_max = std::max(1, mx);
    for (auto m : kModes)
      REQUIRE(simulate_column(col, m, p, n_max) == simulate_column_events(col, m, p, n_max));
    const auto bal = simulate_column(col, WorkloadMode::SparseBalanced, p, n_max).latency;
    const auto imb = simulate_column(col, WorkloadMode::SparseImbalanced, p, n_max).latency;
    const auto den = simulate_column(col, WorkloadMode::DenseBitSerial, p, n_max).latency;
    REQUIRE(bal <= std::max(imb, 1));
    REQUIRE(imb <= den);
    REQUIRE(imb == mx);
  }
}

TEST_CASE("compute cycles: dense over balanced is 16/n_max on one tile") {
  const auto arch = small_arch(4, 4);
  for (int n : {3, 4}) {
    const auto l = conv(4, 4, 4, 1, Precision::Int16, n);
    const auto s = setup(l, 3);
    const auto dense = simulate_layer(l, s.enc, s.ifm, plan_layer(l, arch, WorkloadMode::DenseBitSerial),
                                      WorkloadMode::DenseBitSerial, arch);
    const auto bal = simulate_layer(l, s.enc, s.ifm, plan_layer(l, arch, WorkloadMode::SparseBalanced),
                                    WorkloadMode::SparseBalanced, arch);
    CHECK(dense.cycles.compute_cycles == 16 * 16);
    CHECK(bal.cycles.compute_cycles == std::uint64_t(16 * n));
    CHECK(dense.cycles.fill_drain_cycles == 6);
    CHECK(dense.ofm == bal.ofm);
  }
}

TEST_CASE("8-bit mode halves compute cycles") {
  const auto arch = small_arch(4, 8);
  auto l16 = conv(4, 4, 8, 3, Precision::Int16, 4);
  auto l8 = conv(4, 4, 8, 3, Precision::Int8, 4);
  const auto a = simulate_layer(l16, setup(l16, 1).enc, {}, plan_layer(l16, arch, WorkloadMode::SparseBalanced),
                                WorkloadMode::SparseBalanced, arch, SimOptions{false});
  const auto b = simulate_layer(l8, setup(l8, 1).enc, {}, plan_layer(l8, arch, WorkloadMode::SparseBalanced),
                                WorkloadMode::SparseBalanced, arch, SimOptions{false});
  CHECK(a.cycles.compute_cycles == 2 * b.cycles.compute_cycles);
}

TEST_CASE("cycle accounting invariants") {
  const auto arch = small_arch(4, 4);
  std::mt19937_64 rng(43);
  for (int k = 0; k < 60; ++k) {
    const auto p = (k % 2) ? Precision::Int8 : Precision::Int16;
    const int n = 1 + int(rng() % 4);
    auto l = conv(1 + int(rng() % 9), 1 + int(rng() % 9), 3 + int(rng() % 8), 1 + int(rng() % 3), p, n);
    const auto s = setup(l, 100 + k);
    for (auto m : kModes) {
      const auto r = simulate_layer(l, s.enc, s.ifm, plan_layer(l, arch, m), m, arch).cycles;
      const std::uint64_t array = 16;
      REQUIRE(r.pe_busy_cycles + r.pe_idle_cycles == array * r.total_cycles);
      REQUIRE(r.total_cycles == r.compute_cycles + r.fill_drain_cycles + r.stall_cycles);
      REQUIRE(r.fill_drain_cycles == r.passes * 6);
      if (m != WorkloadMode::SparseBalanced) REQUIRE(r.gated_step_count == 0);
    }
    // gated steps = sum over weight uses of (n_max - nnzb).
    const auto bal = simulate_layer(l, s.enc, s.ifm, plan_layer(l, arch, WorkloadMode::SparseBalanced),
                                    WorkloadMode::SparseBalanced, arch)
                         .cycles;
    const auto od = output_dims(l);
    std::uint64_t gap = 0;
    for (std::size_t i = 0; i < s.enc.weight_count(); ++i) gap += std::uint64_t(n - s.enc.valid_count(i));
    REQUIRE(bal.gated_step_count == gap * std::uint64_t(od.h) * od.w);
  }
}

TEST_CASE("balanced has no idle PEs inside compute windows on a full array") {
  const auto arch = small_arch(4, 4);
  const auto l = conv(8, 4, 6, 3, Precision::Int16, 3);
  const auto s = setup(l, 5);
  const auto r = simulate_layer(l, s.enc, s.ifm, plan_layer(l, arch, WorkloadMode::SparseBalanced),
                                WorkloadMode::SparseBalanced, arch)
                     .cycles;
  CHECK(r.compute_idle_cycles == 0);
  CHECK(r.pe_busy_cycles == 16 * r.compute_cycles);
}

TEST_CASE("doubling n_max doubles compute cycles") {
  const auto arch = small_arch(4, 4);
  for (int n : {1, 2, 3, 4}) {
    auto a = conv(4, 8, 6, 3, Precision::Int16, n);
    auto b = conv(4, 8, 6, 3, Precision::Int16, 2 * n);
    const auto ra = simulate_layer(a, setup(a, 2).enc, {}, plan_layer(a, arch, WorkloadMode::SparseBalanced),
                                   WorkloadMode::SparseBalanced, arch, SimOptions{false});
    const auto rb = simulate_layer(b, setup(b, 2).enc, {}, plan_layer(b, arch, WorkloadMode::SparseBalanced),
                                   WorkloadMode::SparseBalanced, arch, SimOptions{false});
    CHECK(rb.cycles.compute_cycles == 2 * ra.cycles.compute_cycles);
  }
}

TEST_CASE("imbalanced latency follows the slowest weight of each kernel position") {
  // One PE array block, 1x1 kernel: every pixel step costs the block's max NNZB.
  const auto arch = small_arch(2, 2);
  auto l = conv(2, 2, 2, 1, Precision::Int16, 5);
  const FixedTensor w({2, 2, 1, 1}, Precision::Int16, {0b11111, 0b1, 0b11, 0});
  const auto enc = encode_layer(w, 5);
  const auto r = simulate_layer(l, enc, {}, plan_layer(l, arch, WorkloadMode::SparseImbalanced),
                                WorkloadMode::SparseImbalanced, arch, SimOptions{false})
                     .cycles;
  CHECK(r.compute_cycles == 4 * 5);
  CHECK(r.pe_busy_cycles == 4 * (5 + 1 + 2 + 0));
  CHECK(r.compute_idle_cycles == 4 * 4 * 5 - r.pe_busy_cycles);
}

TEST_CASE("OFM is identical across modes and matches the golden model") {
  std::mt19937_64 rng(47);
  for (int k = 0; k < 40; ++k) {
    const auto p = (k % 2) ? Precision::Int8 : Precision::Int16;
    auto l = conv(1 + int(rng() % 6), 1 + int(rng() % 6), 4 + int(rng() % 8), 1 + int(rng() % 3), p,
                  1 + int(rng() % 5));
    l.stride = 1 + int(rng() % 2);
    l.post_relu = true;
    l.ofm_shift = int(rng() % 5);
    const auto arch = small_arch(1 + int(rng() % 4), 2 + int(rng() % 4));
    const auto s = setup(l, 200 + k);
    const auto want = relu_pool(conv_golden(s.ifm, s.quantized, l).ofm, l);
    for (auto m : kModes) {
      const auto plan = plan_layer(l, arch, m);
      const auto a = simulate_layer(l, s.enc, s.ifm, plan, m, arch);
      REQUIRE(a.ofm == want);
      const auto e = simulate_layer_events(l, s.enc, s.ifm, plan, m, arch);
      REQUIRE(e.ofm == want);
      REQUIRE(e.cycles == a.cycles);
      const auto t = simulate_layer(l, s.enc, s.ifm, plan, m, arch, SimOptions{false});
      REQUIRE(t.ofm.empty());
      REQUIRE(t.cycles == a.cycles);
    }
  }
}

TEST_CASE("FC layers run on one column") {
  LayerSpec l;
  l.name = "fc";
  l.kind = LayerKind::FC;
  l.n_ic = 10;
  l.n_oc = 3;
  l.n_nzb_max = 3;
  const auto arch = small_arch(4, 4);
  const auto s = setup(l, 9);
  const auto want = relu_pool(conv_golden(s.ifm, s.quantized, l).ofm, l);
  const auto r = simulate_layer(l, s.enc, s.ifm, plan_layer(l, arch, WorkloadMode::SparseBalanced),
                                WorkloadMode::SparseBalanced, arch);
  CHECK(r.ofm == want);
  // 3 OCs x 3 IC chunks, n_max steps each.
  CHECK(r.cycles.compute_cycles == 3 * 3 * 3);
  const auto e = simulate_layer_events(l, s.enc, s.ifm, plan_layer(l, arch, WorkloadMode::SparseBalanced),
                                       WorkloadMode::SparseBalanced, arch);
  CHECK(e.cycles == r.cycles);
}

TEST_CASE("simulate_layer rejects mismatched inputs") {
  const auto arch = small_arch(4, 4);
  const auto l = conv(4, 4, 4, 1, Precision::Int16, 3);
  const auto s = setup(l, 1);
  auto plan = plan_layer(l, arch, WorkloadMode::SparseBalanced);

  auto other = l;
  other.n_nzb_max = 4;
  CHECK_THROWS_AS(simulate_layer(other, s.enc, s.ifm, plan, WorkloadMode::SparseBalanced, arch), ValidationError);
  auto bad = plan;
  bad.t_ic = 3;
  CHECK_THROWS_AS(simulate_layer(l, s.enc, s.ifm, bad, WorkloadMode::SparseBalanced, arch), ValidationError);
  bad = plan;
  bad.dataflow.reset();
  CHECK_THROWS_AS(simulate_layer(l, s.enc, s.ifm, bad, WorkloadMode::SparseBalanced, arch), ValidationError);
  CHECK_THROWS_AS(simulate_layer(l, s.enc, FixedTensor::zeros({4, 4, 3}, Precision::Int16), plan,
                                 WorkloadMode::SparseBalanced, arch),
                  ValidationError);

  auto tiny = arch;
  tiny.ifm_weight_buffer_words = 8;
  CHECK_THROWS_WITH_AS(simulate_layer(l, s.enc, s.ifm, plan_layer(l, tiny, WorkloadMode::SparseBalanced),
                                      WorkloadMode::SparseBalanced, tiny),
                       doctest::Contains("buffer overflow"), ValidationError);
}

TEST_CASE("simulate_network") {
  const auto arch = small_arch(4, 4);
  NetworkSpec net;
  net.name = "n";
  const auto l = conv(4, 4, 6, 3, Precision::Int16, 3);
  net.layers = {l};
  const auto s = setup(l, 4);
  const EncodedLayer one[] = {s.enc};
  const auto single = simulate_network(net, one, arch, WorkloadMode::SparseBalanced);
  const auto direct = simulate_layer(l, s.enc, {}, plan_layer(l, arch, WorkloadMode::SparseBalanced),
                                     WorkloadMode::SparseBalanced, arch, SimOptions{false});
  CHECK(single.total_cycles == direct.cycles.total_cycles);
  CHECK(single.frames_per_second == doctest::Approx(arch.clock_hz / double(direct.cycles.total_cycles)));

  auto again = l;
  again.branch = true;
  net.layers = {l, again};
  const EncodedLayer two[] = {s.enc, s.enc};
  const auto doubled = simulate_network(net, two, arch, WorkloadMode::SparseBalanced);
  CHECK(doubled.total_cycles == 2 * single.total_cycles);
}
