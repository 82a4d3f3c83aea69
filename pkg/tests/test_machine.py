import dataclasses

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ecmkit import fixtures as fx
from ecmkit.errors import ConfigError, UnsupportedError
from ecmkit.machine import (L3Policy, SimdLevel, load_machine, machine_from_dict,
                            peak_performance, rescale_frequency)
from ecmkit._config import read_toml

from conftest import machine_models


def _raw(name="ivb"):
    return read_toml(fx.path("machines", f"{name}.machine"))


def test_ivb_fixture(ivb):
    assert (ivb.core_freq_ghz, ivb.mem_bw_gbs, ivb.l1l2_bw_bcy, ivb.n_cores) == (2.2, 40.0, 32.0, 10)
    assert ivb.l3_policy is L3Policy.INCLUSIVE
    assert ivb.throughputs.exp_cy(SimdLevel.SCALAR) == 27.8
    assert ivb.throughputs.scalar_exp_latency_cy == 64.0


def test_skx_fixture(skx):
    assert (skx.core_freq_ghz, skx.mem_bw_gbs, skx.l1l2_bw_bcy, skx.l2l3_bw_bcy) == (2.3, 105.0, 64.0, 16.0)
    assert skx.duplex and skx.l3_policy is L3Policy.VICTIM and skx.n_cores == 18
    assert skx.throughputs.exp_cy(SimdLevel.AVX512) == 1.5


def test_zero_memory_bandwidth_rejected(tmp_path):
    text = fx.path("machines", "ivb.machine").read_text().replace("mem_bw_gbs = 40.0", "mem_bw_gbs = 0")
    p = tmp_path / "bad.machine"
    p.write_text(text)
    with pytest.raises(ConfigError, match="mem_bw_gbs must be > 0") as exc:
        load_machine(p)
    assert exc.value.field == "mem_bw_gbs" and str(p) in str(exc.value)


def test_parse_error_reports_line(tmp_path):
    p = tmp_path / "broken.machine"
    p.write_text('name = "x"\ncore_freq_ghz = = 2\n')
    with pytest.raises(ConfigError, match="line 2"):
        load_machine(p)


def test_unknown_key_is_an_error():
    raw = _raw()
    raw["turbo"] = True
    with pytest.raises(ConfigError, match="turbo"):
        machine_from_dict(raw)


def test_victim_needs_duplex_flag():
    raw = _raw("skx")
    del raw["l2l3_duplex"]
    with pytest.raises(ConfigError, match="l2l3_duplex"):
        machine_from_dict(raw)


def test_latency_bounds():
    raw = _raw()
    raw["avg_mem_access_latency_cy"] = 0.5
    with pytest.raises(ConfigError, match="avg_mem_access_latency_cy"):
        machine_from_dict(raw)


def test_exp_throughput_must_not_grow_with_width():
    raw = _raw("skx")
    raw["throughputs"]["avx512"]["exp_cy_per_scalar_it"] = 9.0
    with pytest.raises(ConfigError, match="exp_cy_per_scalar_it"):
        machine_from_dict(raw)


def test_no_l3_machine_needs_no_l2l3_bandwidth():
    raw = _raw()
    raw["l3_policy"] = "none"
    del raw["l2l3_bw_bcy"]
    m = machine_from_dict(raw)
    assert not m.has_l3


@pytest.mark.parametrize("machine,simd,n,expected", [
    ("ivb", "avx", 1, 17.6),
    ("skx", "avx512", 18, 1324.8),
    ("skx", "avx512", 1, 73.6),
])
def test_peak_performance(machines, machine, simd, n, expected):
    assert peak_performance(machines[machine], simd, n) == pytest.approx(expected)


def test_peak_rejects_wider_simd(ivb):
    with pytest.raises(UnsupportedError):
        peak_performance(ivb, "avx512")
    with pytest.raises(ValueError):
        peak_performance(ivb, "avx", 11)


@given(m=machine_models(), n=st.integers(min_value=1, max_value=64))
def test_peak_linear_in_cores_and_lanes(m, n):
    n = min(n, m.n_cores)
    one = peak_performance(m, "sse", 1)
    assert peak_performance(m, "sse", n) == pytest.approx(n * one)
    assert peak_performance(m, "avx", 1) == pytest.approx(2 * one)


def test_rescale_identity(ivb):
    assert rescale_frequency(ivb, 2.2) == ivb


def test_rescale_keeps_bandwidths(skx):
    fast = rescale_frequency(skx, 3.5)
    assert fast.core_freq_ghz == fast.uncore_freq_ghz == 3.5
    assert (fast.mem_bw_gbs, fast.l1l2_bw_bcy, fast.l2l3_bw_bcy) == (105.0, 64.0, 16.0)
    assert rescale_frequency(skx, 2.1).core_freq_ghz == 2.1
    with pytest.raises(ValueError):
        rescale_frequency(skx, 0)


def test_machine_is_immutable(ivb):
    with pytest.raises(dataclasses.FrozenInstanceError):
        ivb.n_cores = 4


@pytest.mark.parametrize("level,lanes", [("scalar", 1), ("sse", 2), ("avx", 4), ("avx2", 4), ("avx512", 8)])
def test_simd_lanes(level, lanes):
    assert SimdLevel.parse(level).lanes_f64 == lanes


def test_simd_parse_errors():
    assert SimdLevel.parse("AVX512") is SimdLevel.AVX512
    with pytest.raises(ConfigError):
        SimdLevel.parse("neon")
