"""Shared fixtures, hypothesis strategies and the acceptance summary hook."""

from collections import OrderedDict

import pytest
from hypothesis import strategies as st

from ecmkit import fixtures as fx
from ecmkit.kernel import Access, KernelSpec, StreamSpec, TimingEntry
from ecmkit.machine import (InstructionThroughputTable, L3Policy, MachineModel, SimdLevel,
                            VectorThroughput)


@pytest.fixture(scope="session")
def machines():
    return fx.machines()


@pytest.fixture(scope="session")
def kernels():
    return fx.kernels()


@pytest.fixture(scope="session")
def ivb(machines):
    return machines["ivb"]


@pytest.fixture(scope="session")
def skx(machines):
    return machines["skx"]


@pytest.fixture(scope="session")
def reference():
    return fx.reference()


# ------------------------------------------------------------------ synthetic models

def make_machine(name="synth", policy=L3Policy.INCLUSIVE, duplex=None, freq=2.0, mem_bw=50.0,
                 l1l2=32.0, l2l3=32.0, n_cores=8, simd_max=SimdLevel.AVX):
    if policy is L3Policy.VICTIM and duplex is None:
        duplex = True
    return MachineModel(
        name=name, core_freq_ghz=freq, uncore_freq_ghz=freq, mem_bw_gbs=mem_bw,
        n_cores=n_cores, l1l2_bw_bcy=l1l2, l2l3_bw_bcy=l2l3, l3_policy=policy,
        l2l3_duplex=duplex, simd_max=simd_max,
        throughputs=InstructionThroughputTable(
            per_simd={SimdLevel.SSE: VectorThroughput(10.0), SimdLevel.AVX: VectorThroughput(6.0)},
            scalar_exp_cy=20.0),
    )


positive = st.floats(min_value=0.1, max_value=200.0, allow_nan=False, allow_infinity=False)


@st.composite
def machine_models(draw, policy=None):
    policy = policy or draw(st.sampled_from(list(L3Policy)))
    return make_machine(
        policy=policy,
        duplex=draw(st.booleans()) if policy is L3Policy.VICTIM else None,
        freq=draw(st.floats(min_value=0.8, max_value=5.0)),
        mem_bw=draw(st.floats(min_value=5.0, max_value=400.0)),
        l1l2=draw(st.sampled_from([16.0, 32.0, 64.0])),
        l2l3=draw(st.sampled_from([8.0, 16.0, 32.0])),
        n_cores=draw(st.integers(min_value=1, max_value=64)),
    )


@st.composite
def stream_specs(draw, name):
    access = draw(st.sampled_from(list(Access)))
    run = draw(st.sampled_from([1.0, 1.0, 2.0, 3.0])) if access is Access.READ else 1.0
    return StreamSpec(name=name, elem_b=draw(st.sampled_from([4, 8])), access=access,
                      accesses_per_it=draw(st.integers(min_value=1, max_value=3)),
                      locality_run_length=run)


@st.composite
def kernel_specs(draw, machine_name="synth"):
    n = draw(st.integers(min_value=1, max_value=12))
    streams = tuple(draw(stream_specs(f"s{i}")) for i in range(n))
    timing = {}
    for simd in (SimdLevel.SSE, SimdLevel.AVX):
        timing[(machine_name, simd)] = TimingEntry(
            t_ol_base_cy=draw(st.floats(min_value=0.0, max_value=100.0)),
            n_exp=draw(st.integers(min_value=0, max_value=4)),
            t_nol_cy=draw(st.floats(min_value=0.0, max_value=30.0)))
    return KernelSpec(name="synth_kernel", streams=streams, timing=timing)


# ------------------------------------------------------------------ acceptance summary

_criteria = OrderedDict()


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    n, title = marker.args
    entry = _criteria.setdefault(n, {"title": title, "passed": 0, "failed": []})
    if call.excinfo is None:
        entry["passed"] += 1
    else:
        entry["failed"].append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        e = _criteria[n]
        status = "PASS" if not e["failed"] else "FAIL"
        line = f"criterion {n}: {status}  {e['title']}"
        if e["failed"]:
            line += f"  (failing: {', '.join(e['failed'])})"
        terminalreporter.write_line(line)
