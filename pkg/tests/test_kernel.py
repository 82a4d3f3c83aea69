import pytest
from hypothesis import given

from ecmkit import fixtures as fx
from ecmkit.errors import ConfigError, UnsupportedError
from ecmkit.kernel import (Access, KernelSpec, StreamSpec, TimingEntry, in_core_times,
                           kernel_from_dict)
from ecmkit.machine import SimdLevel

from conftest import kernel_specs, make_machine


def _counts(k):
    reads = [s for s in k.streams if s.access is Access.READ]
    writes = [s for s in k.streams if s.access is not Access.READ]
    return (sum(s.elem_b == 8 for s in reads), sum(s.elem_b == 4 for s in reads), len(writes))


def test_im_current_streams(kernels):
    assert _counts(kernels["im_current"]) == (4, 2, 6)


def test_exc_syn_current_streams(kernels):
    k = kernels["exc_syn_current"]
    assert _counts(k) == (8, 2, 9)
    runs = [s.name for s in k.streams if s.locality_run_length == 3.0]
    assert len(runs) == 2


def test_stream_triad_streams(kernels):
    k = kernels["stream_triad"]
    assert [(s.name, s.access) for s in k.streams] == [
        ("B", Access.READ), ("C", Access.READ), ("A", Access.WRITE)]


@pytest.mark.parametrize("kernel,machine,simd,expected", [
    ("ih_state", "skx", "avx512", (12.1, 1.9)),
    ("im_current", "ivb", "sse", (7.8, 5.5)),
    ("exc_syn_state", "ivb", "avx", (60.0, 3.9)),
])
def test_in_core_times(kernels, machines, kernel, machine, simd, expected):
    got = in_core_times(kernels[kernel], machines[machine], simd)
    assert got == pytest.approx(expected, abs=0.05)


def test_missing_timing_is_unsupported(kernels, ivb):
    with pytest.raises(UnsupportedError, match="avx512"):
        in_core_times(kernels["im_current"], ivb, "avx512")


def test_override_backed_has_no_split(kernels, ivb):
    k = kernels["ih_current"]
    assert k.timing_for("ivb", "sse").override_backed
    with pytest.raises(UnsupportedError, match="override-backed"):
        in_core_times(k, ivb, "sse")


@pytest.mark.parametrize("kw,needle", [
    (dict(elem_b=2), "elem_b"),
    (dict(accesses_per_it=0), "accesses_per_it"),
    (dict(locality_run_length=0.5), "locality_run_length"),
    (dict(access=Access.WRITE, locality_run_length=2.0), "read streams"),
])
def test_stream_errors_name_the_stream(kw, needle):
    args = dict(name="vec_q", elem_b=8, access=Access.READ)
    args.update(kw)
    with pytest.raises(ConfigError, match=needle) as exc:
        StreamSpec(**args)
    assert "vec_q" in str(exc.value)


def test_duplicate_stream_names():
    s = StreamSpec("a", 8, Access.READ)
    with pytest.raises(ConfigError, match="duplicate"):
        KernelSpec("k", (s, s))
    with pytest.raises(ConfigError, match="at least one stream"):
        KernelSpec("k", ())


def test_timing_entry_needs_split_or_override():
    with pytest.raises(ConfigError):
        TimingEntry(t_ol_base_cy=3.0)
    assert TimingEntry(t_serial_override_cy=10.0).override_backed
    with pytest.raises(ConfigError, match="t_nol_cy"):
        TimingEntry(t_ol_base_cy=1.0, t_nol_cy=-1.0)


def test_critical_path_below_throughput_rejected():
    m = make_machine()
    k = KernelSpec("k", (StreamSpec("a", 8, Access.READ),),
                   {("synth", SimdLevel.SSE): TimingEntry(t_ol_base_cy=5.0, n_exp=1, t_nol_cy=1.0,
                                                          cp_cy=12.0)})
    with pytest.raises(ConfigError, match="cp_cy"):
        in_core_times(k, m, "sse")


def test_unknown_keys_rejected():
    raw = {"name": "k", "streams": [{"name": "a", "elem_b": 8, "access": "read", "stride": 2}]}
    with pytest.raises(ConfigError, match="stride"):
        kernel_from_dict(raw)
    raw = {"name": "k", "streams": [{"name": "a", "elem_b": 8, "access": "load"}]}
    with pytest.raises(ConfigError, match="'a'"):
        kernel_from_dict(raw)


def test_load_reports_source(tmp_path):
    p = tmp_path / "bad.kernel"
    p.write_text('name = "k"\nstreams = [{ name = "a", elem_b = 3, access = "read" }]\n')
    with pytest.raises(ConfigError) as exc:
        fx.kernel(str(p))
    assert str(p) in str(exc.value)


def test_kernel_class(kernels):
    assert kernels["im_current"].kernel_class == "current"
    assert kernels["im_state"].kernel_class == "state"
    assert kernels["spike_delivery"].kernel_class == "special"


@pytest.mark.parametrize("name", fx.STATE_KERNELS)
def test_state_kernel_t_ol_falls_with_width(kernels, skx, name):
    k = kernels[name]
    levels = [s for s in k.simd_levels("skx") if k.timing_for("skx", s).has_split]
    t_ol = [in_core_times(k, skx, s)[0] for s in levels]
    assert t_ol == sorted(t_ol, reverse=True)


@given(k=kernel_specs())
def test_t_ol_counts_exp_cost(k):
    m = make_machine()
    for simd in (SimdLevel.SSE, SimdLevel.AVX):
        e = k.timing_for("synth", simd)
        t_ol, t_nol = in_core_times(k, m, simd)
        assert t_ol == pytest.approx(e.t_ol_base_cy + e.n_exp * m.throughputs.exp_cy(simd))
        assert t_nol == e.t_nol_cy


def test_every_fixture_kernel_has_timings(kernels, machines):
    for k in kernels.values():
        # STREAM is only characterised on the AVX-512 machine
        for mname in (["skx"] if k.name == "stream_triad" else machines):
            assert k.simd_levels(mname), (k.name, mname)
