import numpy as np
import pytest

import sbsim


def conv_layer(n_ic=3, n_oc=4, h=6, k=3, precision=16, n_max=3):
    l = sbsim.LayerSpec()
    l.name = "py"
    l.n_ic, l.n_oc = n_ic, n_oc
    l.h_i = l.w_i = h
    l.h_k = l.w_k = k
    l.precision = precision
    l.n_nzb_max = n_max
    return l


def test_numeric_range_and_quantizer():
    assert sbsim.numeric_range(3, 16) == 697
    assert sbsim.numeric_range(13, 16) == 65399
    assert sbsim.quantize_weight(93, 4) == 92
    assert sbsim.quantize_weight(-93, 3) == -88
    q, stats = sbsim.quantize(np.array([93, -93, 80]), 4)
    assert q.tolist() == [92, -92, 80]
    assert stats["max_abs_error"] == 1


def test_encoding():
    assert [sbsim.bits_per_weight(p, n) for p, n in [(16, 3), (16, 4), (8, 4), (8, 5)]] == [16, 21, 17, 21]
    sign, pos, valid = sbsim.encode_weight(80, 8, 4)
    assert (sign, pos, valid) == (False, [6, 4, 0, 0], [True, True, False, False])
    rng = np.random.default_rng(0)
    w = rng.integers(-128, 128, size=(4, 3, 3, 3))
    q, _ = sbsim.quantize(w, 3, precision=8)
    r = sbsim.encoded_roundtrip(q, 3, precision=8)
    assert np.array_equal(r["weights"], q)
    assert r["total_bits"] == q.size * sbsim.bits_per_weight(8, 3)


def test_macs():
    assert sbsim.bitserial_mac(5, 92, 8) == (460, 8)
    assert sbsim.sparse_mac(5, 92, 4, 8) == (460, 4)
    with pytest.raises(ValueError):
        sbsim.sparse_mac(5, 93, 4, 8)


def test_simulate_layer_matches_golden():
    layer = conv_layer()
    layer.post_relu = True
    w, _ = sbsim.quantize(sbsim.generate_weights(layer, 3), layer.n_nzb_max)
    ifm = sbsim.generate_ifm(layer, 3)
    golden = sbsim.conv_golden(ifm, w, layer)
    arch = sbsim.ArchConfig()
    arch.n_pe, arch.w_is, arch.h_is = 4, 4, 4
    cycles = {}
    for mode in (sbsim.WorkloadMode.DenseBitSerial, sbsim.WorkloadMode.SparseImbalanced,
                 sbsim.WorkloadMode.SparseBalanced):
        ofm, report, dataflow = sbsim.simulate_layer(layer, w, ifm, mode, arch)
        assert np.array_equal(ofm, golden)
        assert dataflow in ("RIF", "RWF")
        cycles[mode] = report["compute_cycles"]
    assert cycles[sbsim.WorkloadMode.DenseBitSerial] * 3 == cycles[sbsim.WorkloadMode.SparseBalanced] * 16
    timing_only, _, _ = sbsim.simulate_layer(layer, w, None, sbsim.WorkloadMode.SparseBalanced, arch)
    assert timing_only is None


def test_column_and_traffic():
    assert sbsim.simulate_column([4, 2], sbsim.WorkloadMode.SparseImbalanced, 16, 4) == (4, [0, 2])
    t = sbsim.dram_traffic(conv_layer(h=20), sbsim.ArchConfig())
    assert t["chosen"] in ("RIF", "RWF")
    best = min(t["RIF"]["total_bits"], t["RWF"]["total_bits"])
    assert t[t["chosen"]]["total_bits"] == best


def test_bundled_network():
    name, layers = sbsim.load_network("alexnet")
    assert name == "alexnet"
    assert len(layers) == 8
    assert layers[0].output_dims() == (55, 55)
    with pytest.raises(sbsim.FormatError):
        sbsim.load_network("no-such-network")


def test_pipeline_is_deterministic(tmp_path):
    a = sbsim.run_pipeline("smoke", tmp_path / "a", seed=42)
    b = sbsim.run_pipeline("smoke", tmp_path / "b", seed=42)
    assert a["ofm_hashes"] == b["ofm_hashes"]
    assert a["speedup"] > 4.0
    for f in a["files"]:
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
