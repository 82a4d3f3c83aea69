import pytest
from hypothesis import given
from hypothesis import strategies as st

from ecmkit import fixtures as fx
from ecmkit.errors import ConfigError, UnmatchedRecordError
from ecmkit.kernel import Access, KernelSpec, StreamSpec, TimingEntry
from ecmkit.machine import SimdLevel
from ecmkit.traffic import Residence
from ecmkit.validation import (CSV_HEADER, OUTLIER, WITHIN_10, WITHIN_35, MeasurementRecord,
                               ValidationRow, classify, load_measurements, load_weights,
                               predict_records, utilization, validate)

from conftest import make_machine

HEADER = ",".join(CSV_HEADER) + "\n"


def _write(tmp_path, body, header=HEADER):
    p = tmp_path / "m.csv"
    p.write_text(header + body)
    return p


def test_runtime_row(tmp_path):
    (rec,) = load_measurements(_write(tmp_path, "im_current,ivb,sse,1,mem,23.8,0.1,,\n"))
    assert rec.is_runtime and rec.cy_per_it_median == 23.8
    assert rec.key == ("im_current", "ivb", SimdLevel.SSE, 1, Residence.MEM)


def test_volume_row(tmp_path):
    (rec,) = load_measurements(_write(tmp_path, "exc_syn_current,,,,,,,205.2,\n"))
    assert not rec.is_runtime and rec.mem_b_per_it == 205.2


def test_threads_zero_rejected(tmp_path):
    with pytest.raises(ConfigError, match="row 2.*threads"):
        load_measurements(_write(tmp_path, "im_current,ivb,sse,0,mem,23.8,0.1,,\n"))


def test_bad_header(tmp_path):
    with pytest.raises(ConfigError, match="header"):
        load_measurements(_write(tmp_path, "", header="kernel,cycles\n"))


def test_short_row_names_line(tmp_path):
    with pytest.raises(ConfigError, match="row 3"):
        load_measurements(_write(tmp_path, "im_current,ivb,sse,1,mem,23.8,0.1,,\nim_current,ivb\n"))


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_measurements(tmp_path / "nope.csv")


def test_record_invariants():
    with pytest.raises(ConfigError):
        MeasurementRecord("k")
    with pytest.raises(ConfigError):
        MeasurementRecord("k", cy_per_it_median=3.0)
    with pytest.raises(ConfigError):
        MeasurementRecord("k", "ivb", SimdLevel.SSE, 1, cy_per_it_median=-1.0)


def test_bundled_measurements_load():
    for name in ("ivb_measurements.csv", "skx_measurements.csv", "ivb_full_neuron.csv",
                 "skx_full_neuron.csv", "tab_mem.csv", "spike_delivery.csv"):
        assert fx.measurements(name)


@pytest.mark.parametrize("err,cls", [(0.0, WITHIN_10), (-0.1, WITHIN_10), (0.2, WITHIN_35),
                                     (-0.35, WITHIN_35), (0.48, OUTLIER)])
def test_classify(err, cls):
    assert classify(err) == cls


def _rec(median):
    return MeasurementRecord("k", "m", SimdLevel.SSE, 1, cy_per_it_median=median)


def test_outlier_example():
    row = ValidationRow(_rec(53.4), predicted=36.1, measured=53.4)
    assert row.rel_error == pytest.approx(0.48, abs=0.005)
    assert row.classification == OUTLIER and row.flagged


def test_exact_prediction():
    assert ValidationRow(_rec(9.7), 9.7, 9.7).rel_error == 0


@given(a=st.floats(min_value=0.1, max_value=1e4), b=st.floats(min_value=0.1, max_value=1e4))
def test_rel_error_sign(a, b):
    err = ValidationRow(_rec(b), a, b).rel_error
    assert (err > 0) == (b > a)
    assert (err < 0) == (b < a)


def test_validate_unmatched():
    with pytest.raises(UnmatchedRecordError, match="k/m/sse/1/mem"):
        validate([_rec(5.0)], {})


def test_validate_skips_unpredicted_volumes():
    vol = MeasurementRecord("k", mem_b_per_it=100.0)
    assert validate([vol], {}).rows == []
    assert validate([vol], {("volume", "k", None): 96.0}).rows[0].predicted == 96.0


def test_validate_im_ivb_l2(machines, kernels):
    recs = [r for r in fx.measurements("ivb_measurements.csv")
            if r.kernel == "im_current" and r.residence is Residence.L2 and r.simd is SimdLevel.SSE]
    report = validate(recs, predict_records(recs, machines, kernels))
    assert 0.10 < report.rows[0].rel_error < 0.12


def test_predict_records_unknown_kernel(machines, kernels):
    rec = MeasurementRecord("mystery", "ivb", SimdLevel.SSE, 1, cy_per_it_median=3.0)
    with pytest.raises(UnmatchedRecordError):
        predict_records([rec], machines, kernels)
    assert predict_records([rec], machines, kernels, strict=False) == {}


def test_median_summary(machines, kernels):
    recs = fx.measurements("skx_full_neuron.csv")
    report = validate(recs, predict_records(recs, machines, kernels))
    classes = {k.name: k.kernel_class for k in kernels.values()}
    summary = report.summary(classes)
    assert set(summary) == {"current", "state"}
    assert all(v >= 0 for v in summary.values())


def test_utilization_of_core_bound_kernel():
    m = make_machine()
    k = KernelSpec("busy", (StreamSpec("a", 4, Access.READ),),
                   {("synth", SimdLevel.SSE): TimingEntry(t_ol_base_cy=500.0, t_nol_cy=0.0)})
    assert utilization([k], m, "sse", 1) < 0.01
    with pytest.raises(ValueError):
        utilization([], m, "sse", 1)


def test_utilization_skx_avx512(kernels, skx):
    ks = [kernels[n] for n in fx.KERNEL_SETS["all"]]
    assert utilization(ks, skx, "avx512", skx.n_cores) >= 0.9
    first = next(n for n in range(1, 19) if utilization(ks, skx, "avx512", n) >= 0.9)
    assert first == 6


def test_load_weights(tmp_path):
    w = fx.weights()
    assert set(w) == set(fx.KERNEL_SETS["all"]) and all(v == 1.0 for v in w.values())
    p = tmp_path / "w.csv"
    p.write_text("kernel,weight\nim_current,-1\n")
    with pytest.raises(ConfigError, match=">= 0"):
        load_weights(p)
    p.write_text("name,w\n")
    with pytest.raises(ConfigError, match="header"):
        load_weights(p)
