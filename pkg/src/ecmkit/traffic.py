"""Per-iteration data volumes and how they map onto cache/memory links."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from enum import Enum

from .errors import ConfigError, UnsupportedError
from .kernel import Access, Contiguity, KernelSpec
from .machine import L3Policy, MachineModel


class Residence(str, Enum):
    L1 = "l1"
    L2 = "l2"
    L3 = "l3"
    MEM = "mem"

    @property
    def depth(self) -> int:
        return list(Residence).index(self)

    @classmethod
    def parse(cls, value) -> "Residence":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ConfigError(f"unknown residence level {value!r} (expected l1, l2, l3 or mem)",
                              field="residence") from None


@dataclass(frozen=True)
class TrafficBreakdown:
    """Bytes per scalar iteration, split by transfer class."""

    read_b: float
    wa_b: float
    dirty_b: float
    # clean lines evicted again after use (victim L3 sees these)
    read_only_footprint_b: float

    @property
    def total_b(self) -> float:
        return self.read_b + self.wa_b + self.dirty_b


@dataclass(frozen=True)
class LinkVolumes:
    v_l1l2_b: float = 0.0
    v_l2l3_read_b: float = 0.0
    v_l2l3_write_b: float = 0.0
    v_l2mem_b: float = 0.0
    v_l3mem_b: float = 0.0

    @property
    def v_l2l3_b(self) -> float:
        return self.v_l2l3_read_b + self.v_l2l3_write_b

    @property
    def v_mem_b(self) -> float:
        """Everything that crosses the memory interface."""
        return self.v_l2mem_b + self.v_l3mem_b


def traffic(k: KernelSpec, cache_line_b: int = 64) -> TrafficBreakdown:
    """Steady-state traffic of one scalar iteration with all streams hitting distinct lines.

    Reads of indexed streams with repeated indices are divided by the
    average run length of the repeats.
    """
    read = wa = dirty = footprint = 0.0
    for s in k.streams:
        vol = s.accesses_per_it * s.elem_b
        if s.access is Access.READ:
            weighted = vol / s.locality_run_length
            read += weighted
            footprint += weighted
        elif s.access is Access.WRITE:
            wa += vol
            dirty += vol
        else:
            read += vol
            dirty += vol
    return TrafficBreakdown(read_b=read, wa_b=wa, dirty_b=dirty, read_only_footprint_b=footprint)


def link_volumes(t: TrafficBreakdown, m: MachineModel, residence) -> LinkVolumes:
    residence = Residence.parse(residence)
    if residence is Residence.L1:
        return LinkVolumes()
    inbound = t.read_b + t.wa_b
    if residence is Residence.L2:
        return LinkVolumes(v_l1l2_b=t.total_b)
    if m.l3_policy is L3Policy.NONE:
        if residence is Residence.L3:
            raise UnsupportedError(f"machine {m.name} has no L3 cache")
        return LinkVolumes(v_l1l2_b=t.total_b, v_l2mem_b=t.total_b)
    if m.l3_policy is L3Policy.INCLUSIVE:
        if residence is Residence.L3:
            return LinkVolumes(v_l1l2_b=t.total_b, v_l2l3_read_b=inbound,
                               v_l2l3_write_b=t.dirty_b)
        return LinkVolumes(v_l1l2_b=t.total_b, v_l2l3_read_b=inbound,
                           v_l2l3_write_b=t.dirty_b, v_l3mem_b=t.total_b)
    # victim L3: L2 evicts every line (clean or dirty) into L3; DRAM fills L2 directly
    evicted = t.read_only_footprint_b + t.dirty_b
    if residence is Residence.L3:
        return LinkVolumes(v_l1l2_b=t.total_b, v_l2l3_read_b=inbound, v_l2l3_write_b=evicted)
    return LinkVolumes(v_l1l2_b=t.total_b, v_l2l3_write_b=evicted,
                       v_l2mem_b=inbound, v_l3mem_b=t.dirty_b)


def worst_case_branching(t: TrafficBreakdown, k: KernelSpec, boundary_fraction: float,
                         cache_line_b: int = 64, elem_b: int = 8) -> TrafficBreakdown:
    """Add one mostly-useless cache line per indirect array at each section boundary.

    ``boundary_fraction`` is the share of iterations that sit on a boundary
    where ``parent_index[i]`` jumps far away from ``i``.
    """
    if k.boundary_indirect_arrays is None:
        raise UnsupportedError(f"kernel {k.name} has no boundary_indirect_arrays")
    if not 0.0 <= boundary_fraction <= 1.0:
        raise ValueError("boundary_fraction must lie in [0, 1]")
    extra = boundary_fraction * k.boundary_indirect_arrays * (cache_line_b - elem_b)
    # the extra lines are clean and get evicted like any other read-only line
    return dataclasses.replace(t, read_b=t.read_b + extra,
                               read_only_footprint_b=t.read_only_footprint_b + extra)


def worst_case_random_traffic(k: KernelSpec, cache_line_b: int = 64) -> TrafficBreakdown:
    """Traffic when every non-contiguous access pulls a whole cache line from memory.

    ``random_access_count`` counts line transfers: a written random stream
    costs one line in and one line back out. Streams marked contiguous keep
    their element-sized cost.
    """
    if k.random_access_count is None:
        raise UnsupportedError(f"kernel {k.name} has no random_access_count")
    n_lines = k.random_access_count
    contiguous = [s for s in k.streams if s.contiguity is Contiguity.CONTIGUOUS]
    written_random = sum(1 for s in k.streams
                         if s.contiguity is not Contiguity.CONTIGUOUS and s.written)
    dirty_lines = min(written_random, n_lines)
    read_lines = n_lines - dirty_lines
    clean_lines = max(read_lines - dirty_lines, 0)

    read = read_lines * cache_line_b
    wa = dirty = 0.0
    footprint = clean_lines * cache_line_b
    for s in contiguous:
        vol = s.accesses_per_it * s.elem_b
        if s.access is Access.READ:
            read += vol
            footprint += vol
        elif s.access is Access.WRITE:
            wa += vol
            dirty += vol
        else:
            read += vol
            dirty += vol
    dirty += dirty_lines * cache_line_b
    return TrafficBreakdown(read_b=read, wa_b=wa, dirty_b=dirty, read_only_footprint_b=footprint)
