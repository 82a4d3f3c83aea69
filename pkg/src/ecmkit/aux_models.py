"""Models outside the ECM design space: Roofline and spike delivery.

Spike delivery is an event-driven kernel with erratic, latency-bound memory
access. It is bracketed by two scenarios: synapses hit in memory order (the
loop critical path dominates) and synapses hit at random (every access pays
an average memory latency).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .errors import UnsupportedError
from .kernel import KernelSpec
from .machine import MachineModel, SimdLevel, peak_performance
from .traffic import TrafficBreakdown, traffic, worst_case_random_traffic


def roofline(intensity_flop_per_b: float, m: MachineModel, simd, n_cores: int = 1) -> float:
    """Attainable GF/s: the lesser of peak and intensity x memory bandwidth."""
    if not intensity_flop_per_b > 0:
        raise ValueError("intensity must be > 0")
    peak = peak_performance(m, simd, n_cores)
    if math.isinf(intensity_flop_per_b):
        return peak
    return min(peak, intensity_flop_per_b * m.mem_bw_gbs)


class Scenario(str, Enum):
    BEST_CASE = "best_case"
    WORST_CASE = "worst_case"


@dataclass(frozen=True)
class LatencyScenario:
    mode: Scenario
    traffic: TrafficBreakdown
    cp_cy: Optional[float] = None
    n_random: Optional[int] = None
    # None means "use the machine's average memory access latency"
    avg_latency_cy: Optional[float] = None
    effective_mem_bw_gbs: Optional[float] = None
    # set when the effective bandwidth is back-solved rather than measured
    bandwidth_note: Optional[str] = None

    def __post_init__(self):
        if self.mode is Scenario.BEST_CASE and self.cp_cy is None:
            raise ValueError("best-case scenario requires cp_cy")
        if self.mode is Scenario.WORST_CASE and self.n_random is None:
            raise ValueError("worst-case scenario requires n_random")
        if self.effective_mem_bw_gbs is not None and not self.effective_mem_bw_gbs > 0:
            raise ValueError("effective_mem_bw_gbs must be > 0")

    @property
    def flagged(self) -> bool:
        return self.bandwidth_note is not None


def spike_delivery_serial(s: LatencyScenario, m: MachineModel) -> float:
    if s.mode is Scenario.BEST_CASE:
        return s.cp_cy
    latency = s.avg_latency_cy if s.avg_latency_cy is not None else m.avg_mem_access_latency_cy
    return s.n_random * latency


def bandwidth_bound(s: LatencyScenario, m: MachineModel) -> float:
    bw = s.effective_mem_bw_gbs or m.mem_bw_gbs
    return s.traffic.total_b * m.core_freq_ghz / bw


def spike_delivery_parallel(s: LatencyScenario, m: MachineModel, n: int) -> float:
    """Either linear scaling of the serial time or the memory bandwidth roof."""
    if not 1 <= n <= m.n_cores:
        raise ValueError(f"n must be in [1, {m.n_cores}]")
    return max(spike_delivery_serial(s, m) / n, bandwidth_bound(s, m))


def spike_delivery_scenario(k: KernelSpec, m: MachineModel, mode, *,
                            effective_mem_bw_gbs: Optional[float] = None,
                            bandwidth_note: Optional[str] = None,
                            avg_latency_cy: Optional[float] = None) -> LatencyScenario:
    """Build a scenario from a kernel fixture (scalar timing entry on ``m``)."""
    mode = Scenario(mode)
    if mode is Scenario.BEST_CASE:
        entry = k.timing_for(m.name, SimdLevel.SCALAR)
        if entry.cp_cy is None:
            raise UnsupportedError(f"kernel {k.name} has no critical path for {m.name}")
        return LatencyScenario(mode=mode, traffic=traffic(k, m.cache_line_b), cp_cy=entry.cp_cy,
                               effective_mem_bw_gbs=effective_mem_bw_gbs,
                               bandwidth_note=bandwidth_note)
    return LatencyScenario(mode=mode, traffic=worst_case_random_traffic(k, m.cache_line_b),
                           n_random=k.random_access_count, avg_latency_cy=avg_latency_cy,
                           effective_mem_bw_gbs=effective_mem_bw_gbs,
                           bandwidth_note=bandwidth_note)


def latency_plus_critical_path(s: LatencyScenario, m: MachineModel, wc_cp_cy: float,
                               n_exp: int = 2) -> float:
    """Diagnostic only: worst-case latency estimate plus critical path and exp() latencies.

    This refinement was tried against measurements and found not to help
    (747 cy/it predicted vs 1087 measured on IVB); it is never used as the
    prediction.
    """
    if s.mode is not Scenario.WORST_CASE:
        raise ValueError("only defined for the worst-case scenario")
    lat = m.throughputs.scalar_exp_latency_cy
    if lat is None:
        raise UnsupportedError(f"{m.name} has no scalar exp() latency")
    return spike_delivery_serial(s, m) + wc_cp_cy + n_exp * lat
