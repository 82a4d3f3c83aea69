"""CPU machine descriptions.

A machine file is TOML with the fields of :class:`MachineModel`. Cache-link
bandwidths are per core in B/cy, memory bandwidth is a measured socket value
in GB/s (1e9 B/s), and frequencies are in GHz (1e9 cy/s), so a memory transfer
of ``V`` bytes costs ``V * core_freq_ghz / mem_bw_gbs`` cycles.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Mapping, Optional

from ._config import check_keys, number, read_toml
from .errors import ConfigError, UnsupportedError


class SimdLevel(str, Enum):
    SCALAR = "scalar"
    SSE = "sse"
    AVX = "avx"
    AVX2 = "avx2"
    AVX512 = "avx512"

    @property
    def lanes_f64(self) -> int:
        return _LANES[self]

    @property
    def rank(self) -> int:
        return _ORDER.index(self)

    @classmethod
    def parse(cls, value) -> "SimdLevel":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            choices = ", ".join(s.value for s in cls)
            raise ConfigError(f"unknown SIMD level {value!r} (expected one of {choices})",
                              field="simd") from None


_ORDER = [SimdLevel.SCALAR, SimdLevel.SSE, SimdLevel.AVX, SimdLevel.AVX2, SimdLevel.AVX512]
_LANES = {SimdLevel.SCALAR: 1, SimdLevel.SSE: 2, SimdLevel.AVX: 4,
          SimdLevel.AVX2: 4, SimdLevel.AVX512: 8}


class L3Policy(str, Enum):
    INCLUSIVE = "inclusive"
    VICTIM = "victim"
    # two-level hierarchy: L2 talks to memory directly
    NONE = "none"


@dataclass(frozen=True)
class VectorThroughput:
    """Inverse throughputs of vector math, in cycles per *scalar* iteration."""

    exp_cy_per_scalar_it: float
    div_cy_per_scalar_it: Optional[float] = None


@dataclass(frozen=True)
class InstructionThroughputTable:
    per_simd: Mapping[SimdLevel, VectorThroughput]
    scalar_exp_cy: float
    scalar_exp_latency_cy: Optional[float] = None

    def exp_cy(self, simd: SimdLevel) -> float:
        """Cost of one exp() per scalar iteration at the given SIMD level."""
        if simd is SimdLevel.SCALAR:
            return self.scalar_exp_cy
        try:
            return self.per_simd[simd].exp_cy_per_scalar_it
        except KeyError:
            raise UnsupportedError(f"no exp() throughput for SIMD level {simd.value}") from None

    def validate(self, source=None):
        values = [("scalar_exp_cy", self.scalar_exp_cy)]
        if self.scalar_exp_latency_cy is not None:
            values.append(("scalar_exp_latency_cy", self.scalar_exp_latency_cy))
        for simd, tp in self.per_simd.items():
            values.append((f"{simd.value}.exp_cy_per_scalar_it", tp.exp_cy_per_scalar_it))
            if tp.div_cy_per_scalar_it is not None:
                values.append((f"{simd.value}.div_cy_per_scalar_it", tp.div_cy_per_scalar_it))
        for name, value in values:
            if not value > 0:
                raise ConfigError(f"throughputs.{name} must be > 0", source=source, field=name)
        # wider SIMD must never make exp() slower per scalar iteration
        prev_name, prev = "scalar", self.scalar_exp_cy
        for simd in sorted(self.per_simd, key=lambda s: s.rank):
            cur = self.per_simd[simd].exp_cy_per_scalar_it
            if cur > prev:
                raise ConfigError(
                    f"throughputs.{simd.value}.exp_cy_per_scalar_it ({cur}) exceeds "
                    f"the narrower {prev_name} value ({prev})",
                    source=source, field=f"{simd.value}.exp_cy_per_scalar_it")
            prev_name, prev = simd.value, cur


@dataclass(frozen=True)
class MachineModel:
    name: str
    core_freq_ghz: float
    uncore_freq_ghz: float
    mem_bw_gbs: float
    n_cores: int
    l1l2_bw_bcy: float
    l2l3_bw_bcy: Optional[float]
    l3_policy: L3Policy
    throughputs: InstructionThroughputTable
    simd_max: SimdLevel
    l2l3_duplex: Optional[bool] = None
    cache_line_b: int = 64
    load_throughput: Mapping[SimdLevel, float] = field(default_factory=dict)
    store_throughput: Mapping[SimdLevel, float] = field(default_factory=dict)
    # number of FMA-capable pipe groups: IVB has one add + one mul port (1),
    # SKX has two FMA units (2)
    fma_per_cy: int = 1
    flops_per_fma: int = 2
    avg_mem_access_latency_cy: float = 20.0

    def __post_init__(self):
        self.validate()

    def validate(self, source=None):
        names = ["core_freq_ghz", "uncore_freq_ghz", "mem_bw_gbs", "l1l2_bw_bcy"]
        if self.has_l3:
            names.append("l2l3_bw_bcy")
        for name in names:
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be > 0", source=source, field=name)
        if self.n_cores < 1:
            raise ConfigError("n_cores must be >= 1", source=source, field="n_cores")
        if self.cache_line_b <= 0:
            raise ConfigError("cache_line_b must be > 0", source=source, field="cache_line_b")
        if self.fma_per_cy < 1 or self.flops_per_fma < 1:
            raise ConfigError("fma_per_cy and flops_per_fma must be >= 1", source=source,
                              field="fma_per_cy")
        if self.l3_policy is L3Policy.VICTIM and self.l2l3_duplex is None:
            raise ConfigError("l2l3_duplex must be given for a victim L3", source=source,
                              field="l2l3_duplex")
        if not 1.0 <= self.avg_mem_access_latency_cy <= 1000.0:
            raise ConfigError("avg_mem_access_latency_cy must lie in [1, 1000]",
                              source=source, field="avg_mem_access_latency_cy")
        for table_name in ("load_throughput", "store_throughput"):
            for simd, v in getattr(self, table_name).items():
                if not v > 0:
                    raise ConfigError(f"{table_name}.{simd.value} must be > 0",
                                      source=source, field=table_name)
        self.throughputs.validate(source)

    @property
    def has_l3(self) -> bool:
        return self.l3_policy is not L3Policy.NONE

    @property
    def duplex(self) -> bool:
        return bool(self.l2l3_duplex)

    def mem_cycles(self, volume_b: float) -> float:
        """Cycles per iteration to move ``volume_b`` bytes over the memory interface."""
        return volume_b * self.core_freq_ghz / self.mem_bw_gbs

    def supports(self, simd: SimdLevel) -> bool:
        return simd.rank <= self.simd_max.rank


def peak_performance(m: MachineModel, simd, n_cores: int = 1) -> float:
    """Double-precision peak in GF/s for ``n_cores`` cores at SIMD level ``simd``."""
    simd = SimdLevel.parse(simd)
    if not m.supports(simd):
        raise UnsupportedError(f"{m.name} supports SIMD up to {m.simd_max.value}, "
                               f"not {simd.value}")
    if not 1 <= n_cores <= m.n_cores:
        raise ValueError(f"n_cores must be in [1, {m.n_cores}], got {n_cores}")
    return m.core_freq_ghz * simd.lanes_f64 * m.fma_per_cy * m.flops_per_fma * n_cores


def rescale_frequency(m: MachineModel, new_core_ghz: float) -> MachineModel:
    """Copy of ``m`` clocked at ``new_core_ghz``.

    The uncore follows the core clock. Cache bandwidths are per cycle and stay
    put; the memory bandwidth is a wall-clock figure and also stays put, which
    is what makes memory terms grow in cycles at higher clock.
    """
    if not new_core_ghz > 0:
        raise ValueError("new_core_ghz must be > 0")
    if new_core_ghz == m.core_freq_ghz:
        return m
    return dataclasses.replace(m, core_freq_ghz=float(new_core_ghz),
                               uncore_freq_ghz=float(new_core_ghz))


_TOP_KEYS = {
    "name", "core_freq_ghz", "uncore_freq_ghz", "mem_bw_gbs", "n_cores", "cache_line_b",
    "l1l2_bw_bcy", "l2l3_bw_bcy", "l2l3_duplex", "l3_policy", "load_throughput",
    "store_throughput", "fma_per_cy", "flops_per_fma", "simd_max", "throughputs",
    "avg_mem_access_latency_cy",
}
_REQUIRED = ("name", "core_freq_ghz", "uncore_freq_ghz", "mem_bw_gbs", "n_cores",
             "l1l2_bw_bcy", "l3_policy", "simd_max", "throughputs")


def _simd_table(raw, where, source):
    if not isinstance(raw, dict):
        raise ConfigError(f"{where} must be a table", source=source, field=where)
    out = {}
    for key, value in raw.items():
        try:
            simd = SimdLevel.parse(key)
        except ConfigError:
            raise ConfigError(f"unknown SIMD level {key!r} in {where}", source=source,
                              field=f"{where}.{key}") from None
        out[simd] = number(raw, key, where, source)
    return out


def _throughputs(raw, source) -> InstructionThroughputTable:
    if not isinstance(raw, dict):
        raise ConfigError("throughputs must be a table", source=source, field="throughputs")
    per_simd = {}
    for key, value in raw.items():
        if key in ("scalar_exp_cy", "scalar_exp_latency_cy"):
            continue
        try:
            simd = SimdLevel.parse(key)
        except ConfigError:
            raise ConfigError(f"unknown key in throughputs: {key}", source=source,
                              field=f"throughputs.{key}") from None
        where = f"throughputs.{key}"
        check_keys(value, {"exp_cy_per_scalar_it", "div_cy_per_scalar_it"}, where, source,
                   required=("exp_cy_per_scalar_it",))
        per_simd[simd] = VectorThroughput(
            exp_cy_per_scalar_it=number(value, "exp_cy_per_scalar_it", where, source),
            div_cy_per_scalar_it=number(value, "div_cy_per_scalar_it", where, source,
                                        required=False),
        )
    return InstructionThroughputTable(
        per_simd=per_simd,
        scalar_exp_cy=number(raw, "scalar_exp_cy", "throughputs", source),
        scalar_exp_latency_cy=number(raw, "scalar_exp_latency_cy", "throughputs", source,
                                     required=False),
    )


def machine_from_dict(raw: dict, source=None) -> MachineModel:
    check_keys(raw, _TOP_KEYS, "machine", source, required=_REQUIRED)
    try:
        policy = L3Policy(raw["l3_policy"])
    except ValueError:
        raise ConfigError(f"l3_policy must be 'inclusive', 'victim' or 'none', "
                          f"got {raw['l3_policy']!r}", source=source, field="l3_policy") from None
    if policy is not L3Policy.NONE and "l2l3_bw_bcy" not in raw:
        raise ConfigError("missing key 'l2l3_bw_bcy' in machine", source=source,
                          field="l2l3_bw_bcy")
    duplex = raw.get("l2l3_duplex")
    if duplex is not None and not isinstance(duplex, bool):
        raise ConfigError("l2l3_duplex must be a boolean", source=source, field="l2l3_duplex")
    n_cores = raw["n_cores"]
    if not isinstance(n_cores, int) or isinstance(n_cores, bool):
        raise ConfigError("n_cores must be an integer", source=source, field="n_cores")
    try:
        simd_max = SimdLevel.parse(raw["simd_max"])
    except ConfigError as exc:
        raise ConfigError(str(exc), source=source, field="simd_max") from None
    where = "machine"
    kwargs = dict(
        name=str(raw["name"]),
        core_freq_ghz=number(raw, "core_freq_ghz", where, source),
        uncore_freq_ghz=number(raw, "uncore_freq_ghz", where, source),
        mem_bw_gbs=number(raw, "mem_bw_gbs", where, source),
        n_cores=n_cores,
        cache_line_b=int(raw.get("cache_line_b", 64)),
        l1l2_bw_bcy=number(raw, "l1l2_bw_bcy", where, source),
        l2l3_bw_bcy=number(raw, "l2l3_bw_bcy", where, source, required=False),
        l2l3_duplex=duplex,
        l3_policy=policy,
        load_throughput=_simd_table(raw.get("load_throughput", {}), "load_throughput", source),
        store_throughput=_simd_table(raw.get("store_throughput", {}), "store_throughput", source),
        fma_per_cy=int(raw.get("fma_per_cy", 1)),
        flops_per_fma=int(raw.get("flops_per_fma", 2)),
        simd_max=simd_max,
        throughputs=_throughputs(raw["throughputs"], source),
        avg_mem_access_latency_cy=number(raw, "avg_mem_access_latency_cy", where, source,
                                         default=20.0),
    )
    try:
        return MachineModel(**kwargs)
    except ConfigError as exc:
        if exc.source is not None or source is None:
            raise
        raise ConfigError(str(exc), source=source, field=exc.field) from None


def load_machine(path) -> MachineModel:
    path = Path(path)
    return machine_from_dict(read_toml(path), source=str(path))
