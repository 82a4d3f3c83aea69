"""Command-line front end: predict, scale, saturate, validate, report, verify.

Exit codes: 0 ok, 1 bad input (parse/validation), 2 unsupported
machine/SIMD/residence combination, 3 measurement record without a
matching prediction. Diagnostics go to stderr only and nothing is printed
on stdout when a command fails.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path
from typing import List, Optional

from . import fixtures
from .aux_models import Scenario, latency_plus_critical_path, spike_delivery_parallel
from .ecm import (EcmContribution, contributions, multicore, predict, saturation_sweep,
                  work_rate)
from .errors import ConfigError, EcmError, UnmatchedRecordError, UnsupportedError
from .kernel import KernelSpec
from .machine import MachineModel, SimdLevel, rescale_frequency
from .traffic import Residence, traffic, worst_case_random_traffic
from .validation import (OUTLIER, WITHIN_10, load_measurements, predict_records, utilization,
                         validate)

EXIT_OK, EXIT_INPUT, EXIT_UNSUPPORTED, EXIT_UNMATCHED = 0, 1, 2, 3
LEVEL_KEYS = ("l1", "l2", "l3", "mem")
CONTRIB_KEYS = ("t_ol", "t_nol", "t_l1l2", "t_l2l3", "t_mem")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; 2 is reserved for unsupported pairs here
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _fmt(x: float, digits: int) -> str:
    return f"{x:.{digits}f}"


def display_tuples(c: EcmContribution, digits: int):
    """Rounded contributions and the predictions composed from them.

    Printed predictions are built from the printed contributions so a
    reader can add up the displayed numbers. On a victim-L3 machine the
    memory term is the sum of its two rounded parts. Without an L3 the
    L2L3 slot is dropped.
    """
    r = lambda x: round(x, digits)  # noqa: E731
    mem = r(c.t_l2mem) + r(c.t_l3mem) if c.victim else r(c.t_mem)
    links = [r(c.t_l1l2), r(c.t_l2l3), r(mem)] if c.has_l3 else [r(c.t_l1l2), r(mem)]
    cs = [r(c.t_ol), r(c.t_nol)] + links
    preds, acc = [], cs[1]
    for extra in [0.0] + links:
        acc = acc + extra
        preds.append(r(max(cs[0], acc)))
    return cs, preds


def notation(c: EcmContribution, residence: Residence, digits: int) -> str:
    cs, preds = display_tuples(c, digits)
    n_links = residence.depth if c.has_l3 else min(residence.depth, 2)
    head = f"{_fmt(cs[0], digits)} || {_fmt(cs[1], digits)}"
    links = [_fmt(v, digits) for v in cs[2:2 + n_links]]
    contrib = "{" + " | ".join([head] + links) + "}"
    pred = "{" + " ] ".join(_fmt(v, digits) for v in preds[:n_links + 1]) + "}"
    return f"{contrib} -> {pred} cy/it"


# ---------------------------------------------------------------- loading

def _machine(value: str) -> MachineModel:
    return fixtures.machine(value)


def _kernel(value: str) -> KernelSpec:
    return fixtures.kernel(value)


def _machine_list(value: str) -> List[MachineModel]:
    if value in ("both", "all"):
        return list(fixtures.machines().values())
    return [_machine(v.strip()) for v in value.split(",") if v.strip()]


def _floats(value: str, what: str) -> List[float]:
    try:
        out = [float(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"bad {what} list {value!r}") from None
    if not out:
        raise ConfigError(f"empty {what} list")
    return out


def _threads(value: str, n_cores: int) -> List[int]:
    try:
        if ".." in value:
            lo, hi = value.split("..", 1)
            out = list(range(int(lo), int(hi) + 1))
        else:
            out = [int(v) for v in value.split(",")]
    except ValueError:
        raise ConfigError(f"bad thread spec {value!r} (use N, a,b,c or 1..N)") from None
    if not out or min(out) < 1 or max(out) > n_cores:
        raise ConfigError(f"threads must lie in 1..{n_cores}, got {value!r}")
    return out


# ---------------------------------------------------------------- output

def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if v is None else v for v in row])
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def _table_text(header, rows) -> str:
    cells = [list(map(str, header))] + [["-" if v is None else str(v) for v in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)).rstrip() for r in cells]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- predict

def predict_record(k: KernelSpec, m: MachineModel, simd, residence: Residence,
                   freq: Optional[float]) -> dict:
    simd = SimdLevel.parse(simd)
    mf = rescale_frequency(m, freq) if freq is not None else m
    p = predict(k, mf, simd)
    rec = {
        "command": "predict",
        "inputs": {"machine": m.name, "kernel": k.name, "simd": simd.value,
                   "residence": residence.value, "threads": 1, "freq_ghz": mf.core_freq_ghz},
        "units": {"time": "cy/it", "freq": "GHz", "work_rate": f"{k.work_unit}/s"},
        "override_backed": p.override_backed,
        "contributions": None,
        "predictions": {},
        "mem_bottleneck_cy": p.mem_bottleneck_cy,
        "n_s": p.n_s,
        "work_rate": None,
    }
    if p.override_backed:
        if residence is not Residence.MEM:
            raise UnsupportedError(f"kernel {k.name} only has a serial in-memory runtime on "
                                   f"{m.name}/{simd.value}; residence {residence.value} "
                                   "is not available")
    else:
        c = contributions(k, mf, simd, residence)
        rec["contributions"] = dict(zip(CONTRIB_KEYS, c.as_tuple()))
        rec["contributions"].update(t_l2mem=c.t_l2mem, t_l3mem=c.t_l3mem)
    for key, value in zip(LEVEL_KEYS, p.as_tuple()):
        if LEVEL_KEYS.index(key) <= residence.depth and value is not None:
            rec["predictions"][key] = value
    value = p.at(residence)
    rec["work_rate"] = work_rate(value, mf, k.work_unit).per_second
    return rec


def cmd_predict(args) -> str:
    k, m = _kernel(args.kernel), _machine(args.machine)
    residence = Residence.parse(args.residence)
    rec = predict_record(k, m, args.simd, residence, args.freq)
    if args.format == "json":
        return _json_text(rec)
    flat = _flatten(rec)
    if args.format == "csv":
        return _csv_text(list(flat), [list(flat.values())])
    inp = rec["inputs"]
    lines = [f"{k.name} on {m.name} ({inp['simd']}, {inp['freq_ghz']:g} GHz), data in {residence.value}"]
    if rec["override_backed"]:
        lines.append(f"serial override: {_fmt(rec['predictions']['mem'], args.digits)} cy/it "
                     "(no contribution split)")
    else:
        mf = rescale_frequency(m, args.freq) if args.freq is not None else m
        c = contributions(k, mf, args.simd, residence)
        lines.append(notation(c, residence, args.digits))
    if residence is Residence.MEM:
        n_s = "none" if rec["n_s"] is None else str(rec["n_s"])
        lines.append(f"memory bottleneck {_fmt(rec['mem_bottleneck_cy'], args.digits)} cy/it, "
                     f"saturation at n_S = {n_s}")
    lines.append(f"work rate {rec['work_rate'] / 1e9:.4g} G{k.work_unit}/s")
    return "\n".join(lines) + "\n"


def _flatten(rec: dict) -> dict:
    out = {"command": rec["command"]}
    out.update(rec["inputs"])
    out["override_backed"] = rec["override_backed"]
    for key in CONTRIB_KEYS + ("t_l2mem", "t_l3mem"):
        out[f"{key}_cy"] = (rec["contributions"] or {}).get(key)
    for key in LEVEL_KEYS:
        out[f"pred_{key}_cy"] = rec["predictions"].get(key)
    out["mem_bottleneck_cy"] = rec["mem_bottleneck_cy"]
    out["n_s"] = rec["n_s"]
    out["work_rate_per_s"] = rec["work_rate"]
    return out


# ---------------------------------------------------------------- scale

def cmd_scale(args) -> str:
    k, m = _kernel(args.kernel), _machine(args.machine)
    mf = rescale_frequency(m, args.freq) if args.freq is not None else m
    p = predict(k, mf, args.simd)
    ns = list(range(1, m.n_cores + 1)) if args.all or not args.threads else \
        _threads(args.threads, m.n_cores)
    rows = []
    for n in ns:
        t = multicore(p, n)
        row = {"n": n, "cy_per_it": t}
        if args.work_rate:
            # t is socket-level cy/it, so this is the aggregate rate
            row["work_rate_per_s"] = work_rate(t, mf, k.work_unit).per_second
        rows.append(row)
    if args.format == "json":
        return _json_text({"command": "scale",
                           "inputs": {"machine": m.name, "kernel": k.name,
                                      "simd": SimdLevel.parse(args.simd).value,
                                      "residence": "mem", "freq_ghz": mf.core_freq_ghz},
                           "units": {"time": "cy/it", "work_rate": f"{k.work_unit}/s"},
                           "mem_bottleneck_cy": p.mem_bottleneck_cy, "n_s": p.n_s,
                           "rows": rows})
    header = list(rows[0])
    if args.format == "csv":
        return _csv_text(header, [list(r.values()) for r in rows])
    shown = []
    for r in rows:
        line = [r["n"], _fmt(r["cy_per_it"], args.digits)]
        if args.work_rate:
            line.append(f"{r['work_rate_per_s'] / 1e9:.4g}")
        shown.append(line)
    head = ["n", "cy/it"] + ([f"G{k.work_unit}/s"] if args.work_rate else [])
    n_s = "none" if p.n_s is None else p.n_s
    return (f"{k.name} on {m.name} ({SimdLevel.parse(args.simd).value}), n_S = {n_s}\n"
            + _table_text(head, shown))


# ---------------------------------------------------------------- saturate

def _weights_for(kernels: List[KernelSpec], path: Optional[str]):
    from .validation import load_weights
    if path:
        w = load_weights(path)
    else:
        w = fixtures.weights()
    missing = [k.name for k in kernels if k.name not in w]
    if missing and path:
        raise ConfigError(f"no weight for kernel(s) {', '.join(missing)}", source=path)
    return None if missing else w


def cmd_saturate(args) -> str:
    m = _machine(args.machine)
    kernels = fixtures.kernel_set(args.kernel_set)
    freqs = _floats(args.freqs, "frequency") if args.freqs else [m.core_freq_ghz]
    weights = _weights_for(kernels, args.weights)
    simd = SimdLevel.parse(args.simd)
    result = saturation_sweep(kernels, m, simd, freqs, args.threshold, weights)
    if args.format == "json":
        return _json_text({"command": "saturate",
                           "inputs": {"machine": m.name, "kernel_set": args.kernel_set,
                                      "simd": simd.value, "threshold": args.threshold},
                           "units": {"freq": "GHz", "n_sat": "cores"},
                           "rows": [{"freq_ghz": f, "n_sat": n} for f, n in result]})
    if args.format == "csv":
        return _csv_text(["freq_ghz", "n_sat"], result)
    rows = [[f"{f:g}", "none" if n is None else n] for f, n in result]
    return (f"{m.name} {simd.value}, {len(kernels)} kernels, threshold {args.threshold:g}\n"
            + _table_text(["GHz", "cores"], rows))


# ---------------------------------------------------------------- validate

def run_validation(measurement_paths, machine_filter=None, kernel_values=None):
    records = []
    for p in measurement_paths:
        bundled = fixtures.path("measurements", p)
        if not Path(p).exists() and bundled.exists():
            p = bundled
        records.extend(load_measurements(p))
    if machine_filter:
        names = {m.name for m in machine_filter}
        records = [r for r in records if r.machine is None or r.machine in names]
    machines = fixtures.machines()
    for m in machine_filter or []:
        machines[m.name] = m
    kernels = fixtures.kernels()
    for v in kernel_values or []:
        k = _kernel(v)
        kernels[k.name] = k
    scen = fixtures.scenarios(kernels.get("spike_delivery"), machines) \
        if "spike_delivery" in kernels else {}
    preds = predict_records(records, machines, kernels, strict=True, scenarios=scen)
    return validate(records, preds), kernels


def cmd_validate(args) -> str:
    mfilter = _machine_list(args.machine) if args.machine else None
    kernel_values = [v for item in args.kernels or [] for v in item.split(",") if v]
    report, kernels = run_validation(args.measurements, mfilter, kernel_values)
    rows = []
    for r in report.rows:
        rec = r.record
        rows.append([rec.kernel, rec.machine, rec.simd.value if rec.simd else None,
                     rec.threads, rec.residence.value if rec.residence else None,
                     "volume_b" if not rec.is_runtime else "cy_per_it",
                     r.predicted, r.measured, r.rel_error, r.classification])
    header = ["kernel", "machine", "simd", "threads", "residence", "quantity", "predicted",
              "measured", "rel_error", "classification"]
    classes = {name: k.kernel_class for name, k in kernels.items()}
    for row in rows:
        classes.setdefault(row[0], "special")
    summary = report.summary(classes)
    if args.format == "json":
        return _json_text({"command": "validate", "rows": [dict(zip(header, r)) for r in rows],
                           "median_abs_rel_error": summary,
                           "flagged": len(report.flagged())})
    if args.format == "csv":
        return _csv_text(header, rows)
    d = args.digits
    shown = [r[:6] + [_fmt(r[6], d), _fmt(r[7], d), f"{r[8]:+.1%}",
                      r[9] + (" *" if r[9] != WITHIN_10 else "")] for r in rows]
    out = _table_text(header, shown)
    for cls, med in summary.items():
        out += f"median |rel_error| {cls}: {med:.1%}\n"
    n_out = sum(1 for r in report.rows if r.classification == OUTLIER)
    out += f"{len(report.flagged())} of {len(report.rows)} records flagged (*), {n_out} outliers\n"
    return out


# ---------------------------------------------------------------- report

def _g(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def _rows_csv(header, rows) -> str:
    return _csv_text(header, [[_g(v) for v in r] for r in rows])


def build_report(machines: List[MachineModel]) -> dict:
    """All report artifacts as {relative path: CSV text}."""
    ks = fixtures.kernels()
    out = {}
    names = [m.name for m in machines]

    serial = {}
    for fname in ("ivb_measurements.csv", "skx_measurements.csv"):
        if fixtures.path("measurements", fname).exists():
            for r in fixtures.measurements(fname):
                serial[r.key] = r

    for kname in ("im_current", "exc_syn_current", "ih_state", "exc_syn_state"):
        k = ks[kname]
        rows = []
        for m in machines:
            for simd in k.simd_levels(m.name):
                c = contributions(k, m, simd)
                p = predict(k, m, simd)
                meas = []
                for lvl in (Residence.L2, Residence.L3, Residence.MEM):
                    rec = serial.get((kname, m.name, simd, 1, lvl))
                    meas += [rec.cy_per_it_median, rec.cy_per_it_iqr] if rec else [None, None]
                rows.append([m.name, simd.value, *c.as_tuple(), *p.as_tuple(), *meas])
        out[f"tables/tab_{kname}.csv"] = _rows_csv(
            ["machine", "simd", "t_ol", "t_nol", "t_l1l2", "t_l2l3", "t_mem",
             "pred_l1", "pred_l2", "pred_l3", "pred_mem", "meas_l2", "iqr_l2",
             "meas_l3", "iqr_l3", "meas_mem", "iqr_mem"], rows)

    for m in machines:
        fname = f"{m.name}_full_neuron.csv"
        if not fixtures.path("measurements", fname).exists():
            continue
        recs = {r.key: r for r in fixtures.measurements(fname)}
        rows = []
        for kname in fixtures.KERNEL_SETS["all"]:
            k = ks[kname]
            for simd in k.simd_levels(m.name):
                p = predict(k, m, simd)
                s = recs.get((kname, m.name, simd, 1, Residence.MEM))
                f = recs.get((kname, m.name, simd, m.n_cores, Residence.MEM))
                full = multicore(p, m.n_cores)
                rel = None if f is None else (f.cy_per_it_median - full) / full
                rows.append([kname, simd.value, p.t_mem,
                             s and s.cy_per_it_median, s and s.cy_per_it_iqr,
                             full, f and f.cy_per_it_median, f and f.cy_per_it_iqr, rel])
        out[f"tables/tab_{m.name}.csv"] = _rows_csv(
            ["kernel", "simd", "serial_pred", "serial_meas", "serial_iqr", "full_socket_pred",
             "full_socket_meas", "full_socket_iqr", "full_socket_rel_error"], rows)

    la = ks["linear_algebra"]
    rows = []
    for m in machines:
        c = contributions(la, m, SimdLevel.SCALAR)
        p = predict(la, m, SimdLevel.SCALAR)
        rec = serial.get(("linear_algebra", m.name, SimdLevel.SCALAR, 1, Residence.MEM))
        rows.append([m.name, *c.as_tuple(), p.t_mem, p.n_s,
                     rec and rec.cy_per_it_median, rec and rec.cy_per_it_iqr])
    out["tables/tab_linalg.csv"] = _rows_csv(
        ["machine", "t_ol", "t_nol", "t_l1l2", "t_l2l3", "t_mem", "pred_mem", "n_s",
         "meas_mem", "iqr_mem"], rows)

    sd = ks["spike_delivery"]
    mmap = {m.name: m for m in machines}
    scen = fixtures.scenarios(sd, mmap)
    meas = {r.key: r for r in fixtures.measurements("spike_delivery.csv")}
    rows, fig_rows = [], []
    for m in machines:
        n_par = fixtures.delivery_threads(m.name)
        for mode in Scenario:
            s = scen[(f"{sd.name}:{mode.value}", m.name)]
            for label, n in (("S", 1), ("P", n_par)):
                rec = meas.get((f"{sd.name}:{mode.value}", m.name, SimdLevel.SCALAR, n,
                                Residence.MEM))
                tag = ("BC-" if mode is Scenario.BEST_CASE else "WC-") + label
                rows.append([m.name, tag, n, spike_delivery_parallel(s, m, n),
                             rec and rec.cy_per_it_median, rec and rec.cy_per_it_iqr,
                             s.bandwidth_note if label == "P" else None])
            for n in range(1, m.n_cores + 1):
                fig_rows.append([m.name, mode.value, n, spike_delivery_parallel(s, m, n)])
        entry = sd.timing.get((m.name, SimdLevel.SCALAR))
        if entry and entry.wc_cp_cy is not None and m.throughputs.scalar_exp_latency_cy:
            s = scen[(f"{sd.name}:worst_case", m.name)]
            rows.append([m.name, "WC-S latency+CP (diagnostic)", 1,
                         latency_plus_critical_path(s, m, entry.wc_cp_cy, entry.n_exp),
                         None, None, "not used as prediction"])
    out["tables/tab_delivery.csv"] = _rows_csv(
        ["machine", "scenario", "threads", "pred", "meas", "iqr", "note"], rows)
    out["figures/fig_delivery.csv"] = _rows_csv(["machine", "scenario", "n", "cy_per_it"],
                                                fig_rows)

    vol = {}
    for r in fixtures.measurements("tab_mem.csv"):
        vol[(r.kernel, r.machine)] = r.mem_b_per_it
    rows = []
    for kname in fixtures.KERNEL_SETS["all"] + ("linear_algebra",):
        rows.append([kname, traffic(ks[kname]).total_b] + [vol.get((kname, n)) for n in names])
    rows.append(["spike_delivery (worst case)", worst_case_random_traffic(sd).total_b]
                + [None] * len(names))
    out["tables/tab_mem.csv"] = _rows_csv(["kernel", "pred_b"] + [f"{n}_meas_b" for n in names],
                                          rows)

    kset = fixtures.kernel_set("all")
    weights = _weights_for(kset, None)
    rows = []
    for m in machines:
        freqs = sorted({m.core_freq_ghz, 3.5})
        for simd in m.throughputs.per_simd:
            for f, n in saturation_sweep(kset, m, simd, freqs, 0.9, weights):
                rows.append([m.name, simd.value, f, n])
            fig = [[n, utilization(kset, m, simd, n, weights)] for n in range(1, m.n_cores + 1)]
            out[f"figures/fig_satur_{m.name}_{simd.value}.csv"] = _rows_csv(
                ["n", "utilization"], fig)
    out["tables/tab_satur_freq.csv"] = _rows_csv(["machine", "simd", "freq_ghz", "n_sat"], rows)

    rows = []
    for m in machines:
        for kname in fixtures.KERNEL_SETS["all"]:
            k = ks[kname]
            for simd in k.simd_levels(m.name):
                p = predict(k, m, simd)
                for n in range(1, m.n_cores + 1):
                    rows.append([m.name, simd.value, kname, n, multicore(p, n)])
    out["figures/fig_scaling.csv"] = _rows_csv(["machine", "simd", "kernel", "n", "cy_per_it"],
                                               rows)
    rows = []
    for m in machines:
        p = predict(la, m, SimdLevel.SCALAR)
        rows += [[m.name, n, multicore(p, n)] for n in range(1, m.n_cores + 1)]
    out["figures/fig_linalg.csv"] = _rows_csv(["machine", "n", "cy_per_it"], rows)
    return dict(sorted(out.items()))


def cmd_report(args) -> str:
    machines = _machine_list(args.machine)
    artifacts = build_report(machines)
    out = Path(args.out)
    try:
        for sub in ("tables", "figures"):
            (out / sub).mkdir(parents=True, exist_ok=True)
        for rel, text in artifacts.items():
            (out / rel).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot write report: {exc.strerror or exc}", source=str(out)) from None
    return "".join(f"{out / rel}\n" for rel in artifacts)


# ---------------------------------------------------------------- verify

def cmd_verify(args) -> str:
    r = fixtures.verify_fixtures()
    lines = [str(c) for c in r.checks if args.verbose or not c.ok]
    lines += [f"manifest: {p}" for p in r.manifest_problems]
    lines.append(f"{sum(c.ok for c in r.checks)}/{len(r.checks)} checks ok")
    if not r.ok:
        raise ConfigError("fixture verification failed:\n" + "\n".join(lines))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ecmkit", description="ECM performance model predictions")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    fmt = _Parser(add_help=False)
    fmt.add_argument("--format", choices=("table", "json", "csv"), default="table")
    fmt.add_argument("--digits", type=int, default=1,
                     help="decimals in table output (default 1)")

    p = sub.add_parser("predict", parents=[fmt], help="single-core ECM prediction")
    p.add_argument("--machine", required=True, help="fixture name or machine file")
    p.add_argument("--kernel", required=True, help="fixture name or kernel file")
    p.add_argument("--simd", required=True)
    p.add_argument("--residence", default="mem", help="l1, l2, l3 or mem")
    p.add_argument("--freq", type=float, help="core clock in GHz")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("scale", parents=[fmt], help="multicore scaling of an in-memory kernel")
    p.add_argument("--machine", required=True)
    p.add_argument("--kernel", required=True)
    p.add_argument("--simd", required=True)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--threads", help="N, a,b,c or 1..N")
    g.add_argument("--all", action="store_true", help="1..n_cores (default)")
    p.add_argument("--work-rate", action="store_true", help="add domain work rate column")
    p.add_argument("--freq", type=float)
    p.set_defaults(func=cmd_scale)

    p = sub.add_parser("saturate", parents=[fmt], help="cores needed to saturate memory")
    p.add_argument("--machine", required=True)
    p.add_argument("--kernel-set", default="all",
                   help="all, current, state or comma-separated kernels")
    p.add_argument("--simd", required=True)
    p.add_argument("--freqs", help="comma-separated GHz values (default: nominal)")
    p.add_argument("--threshold", type=float, default=0.9)
    p.add_argument("--weights", help="kernel,weight CSV (default: bundled weights)")
    p.set_defaults(func=cmd_saturate)

    p = sub.add_parser("validate", parents=[fmt], help="score predictions against measurements")
    p.add_argument("--machine", help="restrict to machine(s); also accepts machine files")
    p.add_argument("--measurements", required=True, nargs="+")
    p.add_argument("--kernels", nargs="*", help="extra kernel files or names")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("report", help="write all tables and figure series as CSV")
    p.add_argument("--machine", default="both")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("verify", help="check bundled fixtures against reference values")
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        text = args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INPUT
    except UnsupportedError as exc:
        print(f"ecmkit: unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except UnmatchedRecordError as exc:
        print(f"ecmkit: {exc}", file=sys.stderr)
        return EXIT_UNMATCHED
    except (EcmError, ValueError) as exc:
        print(f"ecmkit: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
