"""Scoring predictions against measurement files, and application bandwidth use."""

from __future__ import annotations

import csv
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .errors import ConfigError, UnmatchedRecordError
from .machine import MachineModel, SimdLevel
from .traffic import Residence, link_volumes, traffic

CSV_HEADER = ["kernel", "machine", "simd", "threads", "residence", "cy_per_it_median",
              "cy_per_it_iqr", "mem_b_per_it", "avg_freq_ghz"]

WITHIN_10 = "within_10pct"
WITHIN_35 = "within_35pct"
OUTLIER = "outlier"


@dataclass(frozen=True)
class MeasurementRecord:
    kernel: str
    machine: Optional[str] = None
    simd: Optional[SimdLevel] = None
    threads: Optional[int] = None
    residence: Optional[Residence] = None
    cy_per_it_median: Optional[float] = None
    cy_per_it_iqr: Optional[float] = None
    mem_b_per_it: Optional[float] = None
    avg_freq_ghz: Optional[float] = None

    def __post_init__(self):
        if self.cy_per_it_median is not None and not self.cy_per_it_median > 0:
            raise ConfigError("cy_per_it_median must be > 0", field="cy_per_it_median")
        if self.cy_per_it_iqr is not None and self.cy_per_it_iqr < 0:
            raise ConfigError("cy_per_it_iqr must be >= 0", field="cy_per_it_iqr")
        if self.threads is not None and self.threads < 1:
            raise ConfigError("threads must be >= 1", field="threads")
        if self.cy_per_it_median is None and self.mem_b_per_it is None:
            raise ConfigError("record carries neither a runtime nor a memory volume",
                              field="cy_per_it_median")
        if self.cy_per_it_median is not None and None in (self.machine, self.simd, self.threads):
            raise ConfigError("runtime records need machine, simd and threads", field="machine")

    @property
    def is_runtime(self) -> bool:
        return self.cy_per_it_median is not None

    @property
    def key(self) -> Tuple:
        return (self.kernel, self.machine, self.simd, self.threads,
                self.residence or Residence.MEM)


def _opt(cell: str, conv):
    cell = cell.strip()
    return conv(cell) if cell else None


def load_measurements(path) -> List[MeasurementRecord]:
    path = Path(path)
    try:
        fh = path.open(newline="", encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError("file not found", source=str(path)) from None
    records = []
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != CSV_HEADER:
            raise ConfigError(f"expected header {','.join(CSV_HEADER)}", source=str(path),
                              field="header")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(CSV_HEADER):
                raise ConfigError(f"row {lineno}: expected {len(CSV_HEADER)} fields, "
                                  f"got {len(row)}", source=str(path), field=f"row {lineno}")
            cells = dict(zip(CSV_HEADER, row))
            try:
                records.append(MeasurementRecord(
                    kernel=cells["kernel"].strip(),
                    machine=_opt(cells["machine"], str),
                    simd=_opt(cells["simd"], SimdLevel.parse),
                    threads=_opt(cells["threads"], int),
                    residence=_opt(cells["residence"], Residence.parse),
                    cy_per_it_median=_opt(cells["cy_per_it_median"], float),
                    cy_per_it_iqr=_opt(cells["cy_per_it_iqr"], float),
                    mem_b_per_it=_opt(cells["mem_b_per_it"], float),
                    avg_freq_ghz=_opt(cells["avg_freq_ghz"], float),
                ))
            except (ValueError, ConfigError) as exc:
                raise ConfigError(f"row {lineno}: {exc}", source=str(path),
                                  field=f"row {lineno}") from None
    return records


def classify(rel_error: float) -> str:
    err = abs(rel_error)
    if err <= 0.10:
        return WITHIN_10
    if err <= 0.35:
        return WITHIN_35
    return OUTLIER


@dataclass(frozen=True)
class ValidationRow:
    record: MeasurementRecord
    predicted: float
    measured: float

    @property
    def rel_error(self) -> float:
        return (self.measured - self.predicted) / self.predicted

    @property
    def classification(self) -> str:
        return classify(self.rel_error)

    @property
    def flagged(self) -> bool:
        return self.classification != WITHIN_10


@dataclass
class ValidationReport:
    rows: List[ValidationRow] = field(default_factory=list)

    def flagged(self) -> List[ValidationRow]:
        return [r for r in self.rows if r.flagged]

    def median_abs_error(self, kernel_class=None, classes: Optional[Mapping[str, str]] = None):
        """Median |rel_error|, optionally restricted to one kernel class."""
        errs = [abs(r.rel_error) for r in self.rows
                if kernel_class is None or (classes or {}).get(r.record.kernel) == kernel_class]
        return statistics.median(errs) if errs else None

    def summary(self, classes: Mapping[str, str]) -> Dict[str, float]:
        out = {}
        for cls in sorted(set(classes.values())):
            med = self.median_abs_error(cls, classes)
            if med is not None:
                out[cls] = med
        return out


def validate(records: Iterable[MeasurementRecord], predictions: Mapping[Tuple, float]) -> ValidationReport:
    """Compare each runtime record with ``predictions[record.key]``.

    Memory-volume records are compared when ``predictions`` holds a
    ``("volume", kernel, machine)`` entry, otherwise skipped.
    """
    report = ValidationReport()
    for rec in records:
        if rec.is_runtime:
            key = rec.key
            measured = rec.cy_per_it_median
        else:
            key = ("volume", rec.kernel, rec.machine)
            measured = rec.mem_b_per_it
            if key not in predictions:
                continue
        if key not in predictions:
            raise UnmatchedRecordError(f"no prediction for record {_fmt_key(key)}")
        report.rows.append(ValidationRow(record=rec, predicted=predictions[key], measured=measured))
    return report


def _fmt_key(key):
    return "/".join(getattr(k, "value", str(k)) for k in key)


def predict_records(records: Iterable[MeasurementRecord], machines: Mapping[str, MachineModel],
                    kernels: Mapping, strict: bool = True,
                    scenarios: Optional[Mapping[Tuple[str, str], object]] = None) -> Dict[Tuple, float]:
    """Build the prediction map :func:`validate` needs for ``records``.

    Runtime records use the ECM prediction at the record's residence and
    thread count, re-clocked to ``avg_freq_ghz`` when the record has one.
    Volume records use the kernel's predicted memory traffic. Records named
    ``kernel:scenario`` are looked up in ``scenarios`` by (name, machine) and
    predicted with the latency models. With ``strict=False`` records that
    cannot be predicted are left out.
    """
    from .aux_models import spike_delivery_parallel
    from .ecm import multicore, predict

    preds = {}
    for rec in records:
        try:
            if ":" in rec.kernel and rec.is_runtime:
                scenario = (scenarios or {})[(rec.kernel, rec.machine)]
                preds[rec.key] = spike_delivery_parallel(scenario, machines[rec.machine],
                                                         rec.threads)
                continue
            kernel = kernels[rec.kernel]
            if not rec.is_runtime:
                preds[("volume", rec.kernel, rec.machine)] = traffic(kernel).total_b
                continue
            m = machines[rec.machine]
            p = predict(kernel, m, rec.simd, freq_ghz=rec.avg_freq_ghz)
            residence = rec.residence or Residence.MEM
            if rec.threads == 1:
                value = p.at(residence)
            elif residence is Residence.MEM:
                value = multicore(p, rec.threads)
            else:
                value = None
            if value is None:
                raise UnmatchedRecordError(f"no prediction for record {_fmt_key(rec.key)}")
            preds[rec.key] = value
        except (KeyError, UnmatchedRecordError) as exc:
            if strict:
                if isinstance(exc, UnmatchedRecordError):
                    raise
                raise UnmatchedRecordError(f"no prediction for record {_fmt_key(rec.key)} "
                                           f"(unknown {exc})") from None
    return preds


def memory_volume(kernel, m: MachineModel) -> float:
    """Bytes per iteration crossing the memory interface for an in-memory working set."""
    return link_volumes(traffic(kernel, m.cache_line_b), m, Residence.MEM).v_mem_b


def utilization(kernels: Sequence, m: MachineModel, simd, n: int,
                weights: Optional[Mapping[str, float]] = None) -> float:
    """Fraction of the socket memory bandwidth used by the weighted kernel mix on ``n`` cores.

    Each kernel contributes ``weight * volume`` bytes over ``weight * T(n)``
    cycles, so the application bandwidth is total bytes over total cycles.
    """
    from .ecm import multicore, predict

    if not kernels:
        raise ValueError("kernel set is empty")
    total_b = total_cy = 0.0
    for k in kernels:
        w = 1.0 if weights is None else weights[k.name]
        if w < 0:
            raise ValueError(f"negative weight for {k.name}")
        p = predict(k, m, simd)
        total_b += w * memory_volume(k, m)
        total_cy += w * multicore(p, n)
    if total_cy == 0:
        return 0.0
    bw_gbs = total_b / total_cy * m.core_freq_ghz
    return min(bw_gbs / m.mem_bw_gbs, 1.0)


def load_weights(path) -> Dict[str, float]:
    """Read a two-column ``kernel,weight`` CSV of iterations per timestep."""
    path = Path(path)
    out = {}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(row for row in fh if not row.lstrip().startswith("#"))
        if reader.fieldnames != ["kernel", "weight"]:
            raise ConfigError("expected header kernel,weight", source=str(path), field="header")
        for lineno, row in enumerate(reader, start=2):
            try:
                w = float(row["weight"])
            except (TypeError, ValueError):
                raise ConfigError(f"row {lineno}: bad weight {row['weight']!r}",
                                  source=str(path), field=f"row {lineno}") from None
            if w < 0:
                raise ConfigError(f"row {lineno}: weight must be >= 0", source=str(path),
                                  field=f"row {lineno}")
            out[row["kernel"].strip()] = w
    return out
