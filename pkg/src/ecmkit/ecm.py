"""ECM contributions, composed predictions and multicore scaling.

Intel cores are modelled as non-overlapping: every data transfer between
registers, caches and memory adds up serially, while in-core arithmetic
(T_OL) overlaps with all of it. Multicore runtime scales perfectly until the
memory interface saturates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

from .errors import UnsupportedError
from .kernel import KernelSpec, in_core_times
from .machine import L3Policy, MachineModel, SimdLevel, rescale_frequency
from .traffic import LinkVolumes, Residence, link_volumes, traffic

LEVELS = (Residence.L1, Residence.L2, Residence.L3, Residence.MEM)


@dataclass(frozen=True)
class EcmContribution:
    """{T_OL || T_nOL | T_L1L2 | T_L2L3 | T_mem} in cy per scalar iteration.

    ``t_mem`` is T_L3Mem on an inclusive machine and T_L2Mem + T_L3Mem on a
    victim-L3 machine; the two parts are kept in ``t_l2mem``/``t_l3mem``.
    """

    t_ol: float
    t_nol: float
    t_l1l2: float = 0.0
    t_l2l3: float = 0.0
    t_l2mem: float = 0.0
    t_l3mem: float = 0.0
    victim: bool = False
    has_l3: bool = True

    @property
    def t_mem(self) -> float:
        return self.t_l2mem + self.t_l3mem

    @property
    def link_times(self) -> List[Tuple[str, float]]:
        if not self.has_l3:
            return [("L1L2", self.t_l1l2), ("L2Mem", self.t_mem)]
        mem_label = "L2Mem+L3Mem" if self.victim else "L3Mem"
        return [("L1L2", self.t_l1l2), ("L2L3", self.t_l2l3), (mem_label, self.t_mem)]

    def as_tuple(self) -> Tuple[float, float, float, float, float]:
        return (self.t_ol, self.t_nol, self.t_l1l2, self.t_l2l3, self.t_mem)


@dataclass(frozen=True)
class EcmPrediction:
    """Single-core runtime per residence level plus the multicore bottleneck.

    For kernels backed by a known serial runtime only, the cache-level
    entries are ``None`` and ``t_mem`` carries the override.
    """

    t_l1: Optional[float]
    t_l2: Optional[float]
    t_l3: Optional[float]
    t_mem: float
    mem_bottleneck_cy: float
    n_s: Optional[int]
    override_backed: bool = False
    n_cores: Optional[int] = None

    def at(self, residence) -> Optional[float]:
        residence = Residence.parse(residence)
        return {Residence.L1: self.t_l1, Residence.L2: self.t_l2,
                Residence.L3: self.t_l3, Residence.MEM: self.t_mem}[residence]

    def as_tuple(self):
        return (self.t_l1, self.t_l2, self.t_l3, self.t_mem)


def link_times(lv: LinkVolumes, m: MachineModel) -> Tuple[float, float, float, float]:
    """(T_L1L2, T_L2L3, T_L2Mem, T_L3Mem) for the given link volumes."""
    t_l1l2 = lv.v_l1l2_b / m.l1l2_bw_bcy
    if not m.has_l3:
        t_l2l3 = 0.0
    elif m.duplex:
        t_l2l3 = max(lv.v_l2l3_read_b, lv.v_l2l3_write_b) / m.l2l3_bw_bcy
    else:
        t_l2l3 = lv.v_l2l3_b / m.l2l3_bw_bcy
    return t_l1l2, t_l2l3, m.mem_cycles(lv.v_l2mem_b), m.mem_cycles(lv.v_l3mem_b)


def contributions(k: KernelSpec, m: MachineModel, simd, residence=Residence.MEM) -> EcmContribution:
    simd = SimdLevel.parse(simd)
    residence = Residence.parse(residence)
    t_ol, t_nol = in_core_times(k, m, simd)
    lv = link_volumes(traffic(k, m.cache_line_b), m, residence)
    t_l1l2, t_l2l3, t_l2mem, t_l3mem = link_times(lv, m)
    return EcmContribution(t_ol=t_ol, t_nol=t_nol, t_l1l2=t_l1l2, t_l2l3=t_l2l3,
                           t_l2mem=t_l2mem, t_l3mem=t_l3mem,
                           victim=m.l3_policy is L3Policy.VICTIM, has_l3=m.has_l3)


def saturation_point(t_mem: float, bottleneck: float) -> Optional[int]:
    """Cores needed to hit the memory bottleneck, or None if there is none."""
    if bottleneck <= 0:
        return None
    # guard against 13.3/1.9 style ratios landing a hair above an integer
    return max(1, math.ceil(t_mem / bottleneck - 1e-12))


def compose(c: EcmContribution, n_cores: Optional[int] = None) -> EcmPrediction:
    """Runtime for data in L1, L2, L3 and memory under the non-overlapping rule."""
    t_l1 = max(c.t_ol, c.t_nol)
    t_l2 = max(c.t_ol, c.t_nol + c.t_l1l2)
    t_l3 = max(c.t_ol, c.t_nol + c.t_l1l2 + c.t_l2l3) if c.has_l3 else None
    t_mem = max(c.t_ol, c.t_nol + c.t_l1l2 + c.t_l2l3 + c.t_mem)
    return EcmPrediction(t_l1=t_l1, t_l2=t_l2, t_l3=t_l3, t_mem=t_mem,
                         mem_bottleneck_cy=c.t_mem, n_s=saturation_point(t_mem, c.t_mem),
                         n_cores=n_cores)


def predict(k: KernelSpec, m: MachineModel, simd, freq_ghz: Optional[float] = None) -> EcmPrediction:
    """Full prediction for ``k`` on ``m``, optionally re-clocked to ``freq_ghz``.

    Kernels without a contribution split use their serial override
    as the in-memory runtime; the bottleneck term still comes from their
    stream volumes. The override is a cycle count and is not re-clocked.
    """
    simd = SimdLevel.parse(simd)
    if freq_ghz is not None:
        m = rescale_frequency(m, freq_ghz)
    entry = k.timing_for(m.name, simd)
    if entry.has_split:
        return compose(contributions(k, m, simd, Residence.MEM), n_cores=m.n_cores)
    bottleneck = m.mem_cycles(traffic(k, m.cache_line_b).total_b)
    t_mem = entry.t_serial_override_cy
    return EcmPrediction(t_l1=None, t_l2=None, t_l3=None, t_mem=t_mem,
                         mem_bottleneck_cy=bottleneck, n_s=saturation_point(t_mem, bottleneck),
                         override_backed=True, n_cores=m.n_cores)


def multicore(p: EcmPrediction, n: int) -> float:
    """Runtime in cy/it on ``n`` cores: perfect scaling floored by the memory term."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if p.n_cores is not None and n > p.n_cores:
        raise ValueError(f"n = {n} exceeds the machine's {p.n_cores} cores")
    return max(p.t_mem / n, p.mem_bottleneck_cy)


def scaling_curve(p: EcmPrediction, n_max: Optional[int] = None) -> List[Tuple[int, float]]:
    n_max = n_max or p.n_cores
    if n_max is None:
        raise ValueError("n_max is required when the prediction carries no core count")
    return [(n, multicore(p, n)) for n in range(1, n_max + 1)]


@dataclass(frozen=True)
class WorkRate:
    per_second: float
    unit: str

    @property
    def giga(self) -> float:
        return self.per_second / 1e9

    def __str__(self):
        return f"{self.giga:.4g} G{self.unit}/s"


def work_rate(cy_per_it: float, m: MachineModel, unit: str = "iteration") -> WorkRate:
    if not cy_per_it > 0:
        raise ValueError("cy_per_it must be > 0")
    return WorkRate(per_second=m.core_freq_ghz * 1e9 / cy_per_it, unit=unit)


def saturation_sweep(kernels: Sequence[KernelSpec], m: MachineModel, simd,
                     freqs: Iterable[float], threshold: float = 0.9,
                     weights=None) -> List[Tuple[float, Optional[int]]]:
    """Smallest core count reaching ``threshold`` of the memory bandwidth, per clock.

    Utilization is the runtime-weighted application bandwidth (see
    :func:`ecmkit.validation.utilization`). ``None`` means the threshold is
    never reached on this socket.
    """
    from .validation import utilization

    if not kernels:
        raise ValueError("kernel list is empty")
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must lie in [0, 1]")
    out = []
    for f in freqs:
        mf = rescale_frequency(m, f)
        n_sat = None
        for n in range(1, mf.n_cores + 1):
            # tiny slack so a utilization that rounds to the threshold counts
            if utilization(kernels, mf, simd, n, weights) >= threshold - 1e-12:
                n_sat = n
                break
        out.append((float(f), n_sat))
    return out
