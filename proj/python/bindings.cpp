#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "sbsim/config_io.hpp"
#include "sbsim/dataflow.hpp"
#include "sbsim/encoder.hpp"
#include "sbsim/error.hpp"
#include "sbsim/metrics.hpp"
#include "sbsim/pipeline.hpp"
#include "sbsim/quantizer.hpp"
#include "sbsim/reference.hpp"
#include "sbsim/report_io.hpp"
#include "sbsim/systolic.hpp"
#include "sbsim/weight_gen.hpp"

namespace py = pybind11;
using namespace sbsim;

namespace {

using IntArray = py::array_t<std::int32_t, py::array::c_style | py::array::forcecast>;

Precision precision_arg(int bits) { return parse_precision(bits); }

FixedTensor to_tensor(const IntArray& a, int bits) {
  std::vector<std::size_t> dims(a.shape(), a.shape() + a.ndim());
  std::vector<std::int32_t> data(a.data(), a.data() + a.size());
  return FixedTensor(std::move(dims), precision_arg(bits), std::move(data));
}

py::array_t<std::int32_t> to_array(const FixedTensor& t) {
  std::vector<py::ssize_t> shape(t.dims().begin(), t.dims().end());
  py::array_t<std::int32_t> out(shape);
  auto* p = out.mutable_data();
  for (std::size_t i = 0; i < t.size(); ++i) p[i] = t[i];
  return out;
}

py::dict cycles_dict(const CycleReport& r) {
  py::dict d;
  d["layer"] = r.layer;
  d["total_cycles"] = r.total_cycles;
  d["compute_cycles"] = r.compute_cycles;
  d["fill_drain_cycles"] = r.fill_drain_cycles;
  d["stall_cycles"] = r.stall_cycles;
  d["pe_busy_cycles"] = r.pe_busy_cycles;
  d["pe_idle_cycles"] = r.pe_idle_cycles;
  d["compute_idle_cycles"] = r.compute_idle_cycles;
  d["gated_step_count"] = r.gated_step_count;
  d["passes"] = r.passes;
  d["load_bits"] = r.load_bits;
  d["utilization"] = r.utilization();
  return d;
}

py::dict traffic_dict(const TrafficReport& t) {
  py::dict d;
  d["dram_bits_ifm"] = t.dram_bits_ifm;
  d["dram_bits_weight"] = t.dram_bits_weight;
  d["dram_bits_ofm"] = t.dram_bits_ofm;
  d["total_bits"] = t.total_bits;
  d["total_accesses"] = t.total_accesses;
  return d;
}

py::dict stats_dict(const QuantStats& s) {
  py::dict d;
  d["n_max"] = s.n_max;
  d["hist_before"] = s.hist_before;
  d["hist_after"] = s.hist_after;
  d["mse"] = s.mse;
  d["max_abs_error"] = s.max_abs_error;
  d["fraction_modified"] = s.fraction_modified;
  return d;
}

}  // namespace

PYBIND11_MODULE(_sbsim, m) {
  m.doc() = "Bit-exact model of a sparse bit-serial systolic accelerator";

  static py::exception<FormatError> format_error(m, "FormatError", PyExc_IOError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ValidationError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const FormatError& e) {
      format_error(e.what());
    }
  });

  py::enum_<WorkloadMode>(m, "WorkloadMode")
      .value("DenseBitSerial", WorkloadMode::DenseBitSerial)
      .value("SparseImbalanced", WorkloadMode::SparseImbalanced)
      .value("SparseBalanced", WorkloadMode::SparseBalanced);
  py::enum_<Dataflow>(m, "Dataflow").value("RIF", Dataflow::RIF).value("RWF", Dataflow::RWF);
  py::enum_<LayerKind>(m, "LayerKind").value("Conv", LayerKind::Conv).value("FC", LayerKind::FC);

  py::class_<PoolSpec>(m, "PoolSpec")
      .def(py::init<int, int>(), py::arg("window") = 2, py::arg("stride") = 2)
      .def_readwrite("window", &PoolSpec::window)
      .def_readwrite("stride", &PoolSpec::stride);

  py::class_<LayerSpec>(m, "LayerSpec")
      .def(py::init<>())
      .def_readwrite("name", &LayerSpec::name)
      .def_readwrite("kind", &LayerSpec::kind)
      .def_readwrite("n_ic", &LayerSpec::n_ic)
      .def_readwrite("n_oc", &LayerSpec::n_oc)
      .def_readwrite("h_i", &LayerSpec::h_i)
      .def_readwrite("w_i", &LayerSpec::w_i)
      .def_readwrite("h_k", &LayerSpec::h_k)
      .def_readwrite("w_k", &LayerSpec::w_k)
      .def_readwrite("stride", &LayerSpec::stride)
      .def_readwrite("n_nzb_max", &LayerSpec::n_nzb_max)
      .def_property(
          "precision", [](const LayerSpec& l) { return bits_of(l.precision); },
          [](LayerSpec& l, int bits) { l.precision = precision_arg(bits); })
      .def_readwrite("post_relu", &LayerSpec::post_relu)
      .def_readwrite("pool", &LayerSpec::pool)
      .def_readwrite("ofm_shift", &LayerSpec::ofm_shift)
      .def_readwrite("saturate", &LayerSpec::saturate)
      .def_readwrite("branch", &LayerSpec::branch)
      .def("output_dims", [](const LayerSpec& l) {
        const auto d = output_dims(l);
        return py::make_tuple(d.h, d.w);
      });

  py::class_<ArchConfig>(m, "ArchConfig")
      .def(py::init<>())
      .def_readwrite("n_pe", &ArchConfig::n_pe)
      .def_readwrite("w_is", &ArchConfig::w_is)
      .def_readwrite("h_is", &ArchConfig::h_is)
      .def_readwrite("ifm_weight_buffer_words", &ArchConfig::ifm_weight_buffer_words)
      .def_readwrite("output_buffer_words", &ArchConfig::output_buffer_words)
      .def_readwrite("core_power_mw_16b", &ArchConfig::core_power_mw_16b)
      .def_readwrite("core_power_mw_8b", &ArchConfig::core_power_mw_8b)
      .def_readwrite("dram_energy_pj_per_bit", &ArchConfig::dram_energy_pj_per_bit)
      .def_readwrite("clock_hz", &ArchConfig::clock_hz)
      .def_readwrite("dram_bits_per_cycle", &ArchConfig::dram_bits_per_cycle)
      .def_readwrite("area_mm2", &ArchConfig::area_mm2);

  m.def("load_network", [](const std::string& name) {
    const auto net = resolve_network(name);
    return py::make_tuple(net.name, net.layers);
  }, py::arg("name_or_path"), "Bundled network name or JSON path -> (name, [LayerSpec])");

  m.def("nnzb", [](std::int64_t w) { return nnzb(w); });
  m.def("numeric_range", &numeric_range, py::arg("n_max"), py::arg("n_bits"));
  m.def("quantize_weight", &quantize_weight, py::arg("w"), py::arg("n_max"));
  m.def(
      "quantize",
      [](const IntArray& w, int n_max, int bits) {
        auto q = quantize_tensor(to_tensor(w, bits), n_max);
        return py::make_tuple(to_array(q.tensor), stats_dict(q.stats));
      },
      py::arg("weights"), py::arg("n_max"), py::arg("precision") = 16);
  m.def("bits_per_weight", [](int bits, int n_max) { return bits_per_weight(precision_arg(bits), n_max); },
        py::arg("precision"), py::arg("n_max"));

  m.def(
      "encode_weight",
      [](std::int32_t w, int bits, int n_max) {
        const auto e = encode_weight(w, precision_arg(bits), n_max);
        std::vector<int> pos(e.positions.begin(), e.positions.begin() + n_max);
        std::vector<bool> valid;
        for (int s = 0; s < n_max; ++s) valid.push_back(e.valid(s));
        return py::make_tuple(e.sign, pos, valid);
      },
      py::arg("w"), py::arg("precision"), py::arg("n_max"), "-> (sign, positions, bitmap as bools)");
  m.def(
      "encoded_roundtrip",
      [](const IntArray& w, int n_max, int bits) {
        const auto enc = encode_layer(to_tensor(w, bits), n_max);
        const auto img = pack_layer(enc);
        const LayerMeta meta{enc.precision(), enc.n_max(), enc.dims()};
        const auto back = deserialize_encoded_layer(serialize_encoded_layer(unpack_layer(img, meta)));
        py::dict d;
        d["weights"] = to_array(decode_layer(back));
        d["total_bits"] = enc.total_bits();
        d["sign_words"] = img.sign_words.size();
        d["bitmap_words"] = img.bitmap_words.size();
        d["position_words"] = img.position_words.size();
        return d;
      },
      py::arg("weights"), py::arg("n_max"), py::arg("precision") = 16,
      "Encode, pack, unpack, serialize and decode a [Co, Ci, Hk, Wk] weight array");

  m.def(
      "bitserial_mac",
      [](std::int32_t i, std::int32_t w, int bits) {
        const auto r = bitserial_mac(i, w, precision_arg(bits));
        return py::make_tuple(r.value, r.cycles);
      },
      py::arg("i"), py::arg("w"), py::arg("precision") = 16);
  m.def(
      "sparse_mac",
      [](std::int32_t i, std::int32_t w, int n_max, int bits) {
        const auto r = sparse_mac(i, encode_weight(w, precision_arg(bits), n_max), n_max);
        return py::make_tuple(r.value, r.cycles);
      },
      py::arg("i"), py::arg("w"), py::arg("n_max"), py::arg("precision") = 16);

  m.def(
      "conv_golden",
      [](const IntArray& ifm, const IntArray& w, const LayerSpec& layer) {
        const int bits = bits_of(layer.precision);
        return to_array(relu_pool(conv_golden(to_tensor(ifm, bits), to_tensor(w, bits), layer).ofm, layer));
      },
      py::arg("ifm"), py::arg("weights"), py::arg("layer"), "Golden OFM after write-out, ReLU and pooling");

  m.def(
      "simulate_layer",
      [](const LayerSpec& layer, const IntArray& w, const py::object& ifm, WorkloadMode mode, const ArchConfig& arch) {
        const int bits = bits_of(layer.precision);
        const auto enc = encode_layer(to_tensor(w, bits), layer.n_nzb_max);
        const auto plan = plan_layer(layer, arch, mode);
        const bool functional = !ifm.is_none();
        const auto in = functional ? to_tensor(ifm.cast<IntArray>(), bits) : FixedTensor();
        const auto r = simulate_layer(layer, enc, in, plan, mode, arch, SimOptions{functional});
        py::object ofm = functional ? py::object(to_array(r.ofm)) : py::none();
        return py::make_tuple(ofm, cycles_dict(r.cycles), to_string(*plan.dataflow));
      },
      py::arg("layer"), py::arg("weights"), py::arg("ifm"), py::arg("mode"), py::arg("arch") = ArchConfig{},
      "Quantized [Co, Ci, Hk, Wk] weights -> (OFM or None, cycle report, dataflow)");

  m.def(
      "simulate_column",
      [](const std::vector<int>& counts, WorkloadMode mode, int bits, int n_max) {
        const auto t = simulate_column(counts, mode, precision_arg(bits), n_max);
        return py::make_tuple(t.latency, t.idle);
      },
      py::arg("nnzb"), py::arg("mode"), py::arg("precision"), py::arg("n_max"));

  m.def(
      "dram_traffic",
      [](const LayerSpec& layer, const ArchConfig& arch, bool encoded) {
        const auto fmt = encoded ? WeightFormat::Encoded : WeightFormat::Raw;
        const auto plan = tile_layer(layer, arch);
        py::dict d;
        d["RIF"] = traffic_dict(dram_traffic(layer, plan, Dataflow::RIF, fmt));
        d["RWF"] = traffic_dict(dram_traffic(layer, plan, Dataflow::RWF, fmt));
        d["chosen"] = to_string(choose_dataflow(layer, plan, fmt));
        d["tiles"] = py::make_tuple(plan.t_ic, plan.t_oc, plan.t_wi, plan.t_hi);
        return d;
      },
      py::arg("layer"), py::arg("arch") = ArchConfig{}, py::arg("encoded") = true);

  m.def(
      "generate_weights",
      [](const LayerSpec& layer, std::uint64_t seed, std::size_t index, const std::vector<double>& profile) {
        const auto dist = profile.empty() ? WeightDistribution::Uniform : WeightDistribution::Profile;
        return to_array(generate_weights(layer, seed, index, dist, profile));
      },
      py::arg("layer"), py::arg("seed"), py::arg("index") = 0, py::arg("profile") = std::vector<double>{});
  m.def(
      "generate_ifm",
      [](const LayerSpec& layer, std::uint64_t seed, std::size_t index) {
        return to_array(generate_ifm(layer, seed, index));
      },
      py::arg("layer"), py::arg("seed"), py::arg("index") = 0);

  m.def(
      "run_pipeline",
      [](const std::string& network, const std::filesystem::path& out_dir, std::uint64_t seed,
         const std::string& workload, std::optional<int> precision, std::optional<int> n_max) {
        RunManifest man;
        man.network = network;
        man.out_dir = out_dir;
        man.seed = seed;
        man.workload = parse_workload(workload);
        if (precision) man.precision = precision_arg(*precision);
        man.n_max = n_max;
        PipelineResult r;
        {
          py::gil_scoped_release release;
          r = run_pipeline(man);
        }
        py::dict d;
        d["speedup"] = r.ratios.speedup;
        d["compute_speedup"] = r.ratios.compute_speedup;
        d["energy_efficiency_ratio"] = r.ratios.energy_efficiency_ratio;
        d["candidate_cycles"] = r.candidate.total_cycles;
        d["baseline_cycles"] = r.baseline.total_cycles;
        std::vector<std::string> files;
        for (const auto& f : r.files) files.push_back(f.generic_string());
        d["files"] = files;
        std::vector<std::string> hashes;
        for (const auto& c : r.checks) hashes.push_back(hex64(c.simulated_hash));
        d["ofm_hashes"] = hashes;
        return d;
      },
      py::arg("network"), py::arg("out_dir"), py::arg("seed") = 1, py::arg("workload") = "balanced",
      py::arg("precision") = py::none(), py::arg("n_max") = py::none());
}
