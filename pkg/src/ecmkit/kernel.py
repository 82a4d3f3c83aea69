"""Declarative loop-kernel descriptions.

A kernel is a list of data streams (what one scalar iteration reads and
writes) plus the in-core cycle inputs per (machine, SIMD level). In-core
numbers come from static analysis of the compiled loop; this package takes
them as given.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, Optional, Tuple

from ._config import check_keys, number, read_toml
from .errors import ConfigError, UnsupportedError
from .machine import MachineModel, SimdLevel


class Access(str, Enum):
    READ = "read"
    # store miss: write-allocate read plus write-back
    WRITE = "write"
    # read-modify-write of the same line: read plus write-back, no extra allocate
    UPDATE = "update"


class Contiguity(str, Enum):
    CONTIGUOUS = "contiguous"
    INDEXED_CONTIGUOUS = "indexed_contiguous"
    RANDOM = "random"


@dataclass(frozen=True)
class StreamSpec:
    name: str
    elem_b: int
    access: Access
    accesses_per_it: int = 1
    locality_run_length: float = 1.0
    contiguity: Contiguity = Contiguity.CONTIGUOUS

    def __post_init__(self):
        if self.elem_b not in (4, 8):
            raise ConfigError(f"stream {self.name}: elem_b must be 4 or 8", field=self.name)
        if self.accesses_per_it < 1:
            raise ConfigError(f"stream {self.name}: accesses_per_it must be >= 1",
                              field=self.name)
        if self.locality_run_length < 1:
            raise ConfigError(f"stream {self.name}: locality_run_length must be >= 1",
                              field=self.name)
        if self.locality_run_length > 1 and self.access is not Access.READ:
            raise ConfigError(f"stream {self.name}: locality_run_length > 1 is only valid "
                              "for read streams", field=self.name)

    @property
    def written(self) -> bool:
        return self.access is not Access.READ


@dataclass(frozen=True)
class TimingEntry:
    """In-core inputs for one (machine, SIMD level) pair, in cy per scalar iteration.

    Either ``t_ol_base_cy``/``t_nol_cy`` (full contribution split) or
    ``t_serial_override_cy`` (single-core in-memory runtime only)
    must be present.
    """

    t_ol_base_cy: Optional[float] = None
    n_exp: int = 0
    t_nol_cy: Optional[float] = None
    cp_cy: Optional[float] = None
    t_serial_override_cy: Optional[float] = None
    # critical path of the random-order variant, diagnostic use only
    wc_cp_cy: Optional[float] = None

    def __post_init__(self):
        for name in ("t_ol_base_cy", "t_nol_cy", "cp_cy", "t_serial_override_cy", "wc_cp_cy"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ConfigError(f"{name} must be >= 0", field=name)
        if self.n_exp < 0:
            raise ConfigError("n_exp must be >= 0", field="n_exp")
        has_split = self.t_ol_base_cy is not None and self.t_nol_cy is not None
        if not has_split and self.t_serial_override_cy is None:
            raise ConfigError("timing entry needs t_ol_base_cy and t_nol_cy, "
                              "or t_serial_override_cy", field="timing")

    @property
    def has_split(self) -> bool:
        return self.t_ol_base_cy is not None and self.t_nol_cy is not None

    @property
    def override_backed(self) -> bool:
        return not self.has_split


@dataclass(frozen=True)
class KernelSpec:
    name: str
    streams: Tuple[StreamSpec, ...]
    timing: Dict[Tuple[str, SimdLevel], TimingEntry] = field(default_factory=dict)
    work_unit: str = "iteration"
    random_access_count: Optional[int] = None
    boundary_indirect_arrays: Optional[int] = None

    def __post_init__(self):
        if not self.streams:
            raise ConfigError(f"kernel {self.name}: at least one stream is required",
                              field="streams")
        seen = set()
        for s in self.streams:
            if s.name in seen:
                raise ConfigError(f"kernel {self.name}: duplicate stream name {s.name!r}",
                                  field=s.name)
            seen.add(s.name)

    @property
    def kernel_class(self) -> str:
        if self.name.endswith("_current"):
            return "current"
        if self.name.endswith("_state"):
            return "state"
        return "special"

    def timing_for(self, machine: str, simd) -> TimingEntry:
        simd = SimdLevel.parse(simd)
        try:
            return self.timing[(machine, simd)]
        except KeyError:
            have = ", ".join(f"{m}/{s.value}" for m, s in sorted(self.timing, key=str)) or "none"
            raise UnsupportedError(f"kernel {self.name} has no timing for {machine}/{simd.value} "
                                   f"(available: {have})") from None

    def simd_levels(self, machine: str):
        return sorted((s for m, s in self.timing if m == machine), key=lambda s: s.rank)


def in_core_times(k: KernelSpec, m: MachineModel, simd) -> Tuple[float, float]:
    """(T_OL, T_nOL) in cy per scalar iteration.

    T_OL is the analysed loop throughput plus the vector exp() cost for each
    exponential in the loop body.
    """
    simd = SimdLevel.parse(simd)
    entry = k.timing_for(m.name, simd)
    if not entry.has_split:
        raise UnsupportedError(f"kernel {k.name} has no contribution split for "
                               f"{m.name}/{simd.value} (override-backed)")
    t_ol = entry.t_ol_base_cy + entry.n_exp * m.throughputs.exp_cy(simd)
    if entry.cp_cy is not None and entry.cp_cy < t_ol:
        raise ConfigError(f"kernel {k.name}: cp_cy ({entry.cp_cy}) is below T_OL ({t_ol:.2f}) "
                          f"on {m.name}/{simd.value}", field="cp_cy")
    return t_ol, entry.t_nol_cy


_KERNEL_KEYS = {"name", "work_unit", "streams", "timing", "random_access_count",
                "boundary_indirect_arrays"}
_STREAM_KEYS = {"name", "elem_b", "access", "accesses_per_it", "locality_run_length",
                "contiguity"}
_TIMING_KEYS = {"t_ol_base_cy", "n_exp", "t_nol_cy", "cp_cy", "t_serial_override_cy",
                "wc_cp_cy"}


def _int(raw, key, where, source, default=None):
    if key not in raw:
        return default
    v = raw[key]
    if not isinstance(v, int) or isinstance(v, bool):
        raise ConfigError(f"{key} in {where} must be an integer", source=source, field=key)
    return v


def _stream(raw, idx, source) -> StreamSpec:
    where = f"streams[{idx}]"
    check_keys(raw, _STREAM_KEYS, where, source, required=("name", "elem_b", "access"))
    where = f"stream {raw['name']!r}"
    try:
        access = Access(raw["access"])
    except ValueError:
        raise ConfigError(f"{where}: access must be read, write or update",
                          source=source, field=raw["name"]) from None
    try:
        contiguity = Contiguity(raw.get("contiguity", "contiguous"))
    except ValueError:
        raise ConfigError(f"{where}: unknown contiguity {raw.get('contiguity')!r}",
                          source=source, field=raw["name"]) from None
    return StreamSpec(
        name=str(raw["name"]),
        elem_b=_int(raw, "elem_b", where, source),
        access=access,
        accesses_per_it=_int(raw, "accesses_per_it", where, source, default=1),
        locality_run_length=number(raw, "locality_run_length", where, source, default=1.0),
        contiguity=contiguity,
    )


def kernel_from_dict(raw: dict, source=None) -> KernelSpec:
    check_keys(raw, _KERNEL_KEYS, "kernel", source, required=("name", "streams"))
    try:
        streams = tuple(_stream(s, i, source) for i, s in enumerate(raw["streams"]))
        timing = {}
        for machine, per_simd in raw.get("timing", {}).items():
            for simd_key, entry in per_simd.items():
                where = f"timing.{machine}.{simd_key}"
                simd = SimdLevel.parse(simd_key)
                check_keys(entry, _TIMING_KEYS, where, source)
                try:
                    timing[(machine, simd)] = TimingEntry(
                        t_ol_base_cy=number(entry, "t_ol_base_cy", where, source, required=False),
                        n_exp=_int(entry, "n_exp", where, source, default=0),
                        t_nol_cy=number(entry, "t_nol_cy", where, source, required=False),
                        cp_cy=number(entry, "cp_cy", where, source, required=False),
                        t_serial_override_cy=number(entry, "t_serial_override_cy", where,
                                                    source, required=False),
                        wc_cp_cy=number(entry, "wc_cp_cy", where, source, required=False),
                    )
                except ConfigError as exc:
                    raise ConfigError(f"{where}: {exc}", source=source, field=where) from None
        return KernelSpec(
            name=str(raw["name"]),
            streams=streams,
            timing=timing,
            work_unit=str(raw.get("work_unit", "iteration")),
            random_access_count=_int(raw, "random_access_count", "kernel", source),
            boundary_indirect_arrays=_int(raw, "boundary_indirect_arrays", "kernel", source),
        )
    except ConfigError as exc:
        if exc.source is not None or source is None:
            raise
        raise ConfigError(str(exc), source=source, field=exc.field) from None


def load_kernel(path) -> KernelSpec:
    path = Path(path)
    return kernel_from_dict(read_toml(path), source=str(path))
