"""Bundled machine, kernel, measurement and weight files.

The directory can be swapped out by pointing ``ECMKIT_FIXTURES`` at another
tree with the same layout (machines/, kernels/, measurements/, weights/).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .._config import read_toml
from ..errors import ConfigError
from ..kernel import KernelSpec, load_kernel
from ..machine import MachineModel, load_machine

ENV_VAR = "ECMKIT_FIXTURES"

CURRENT_KERNELS = ("exc_syn_current", "inh_syn_current", "nats2_t_current", "ih_current",
                   "im_current", "skv3_1_current")
STATE_KERNELS = ("exc_syn_state", "inh_syn_state", "nats2_t_state", "ih_state", "im_state",
                 "skv3_1_state")
KERNEL_SETS = {
    "all": CURRENT_KERNELS + STATE_KERNELS,
    "current": CURRENT_KERNELS,
    "state": STATE_KERNELS,
}


def fixtures_dir() -> Path:
    env = os.environ.get(ENV_VAR)
    return Path(env) if env else Path(__file__).resolve().parent


def path(*parts) -> Path:
    return fixtures_dir().joinpath(*parts)


def machine_names() -> List[str]:
    return sorted(p.stem for p in path("machines").glob("*.machine"))


def kernel_names() -> List[str]:
    return sorted(p.stem for p in path("kernels").glob("*.kernel"))


def resolve(value: str, kind: str) -> Path:
    """Accept either a file path or a bundled fixture name."""
    p = Path(value)
    if p.suffix and p.exists():
        return p
    candidate = path(f"{kind}s", f"{value}.{kind}")
    if candidate.exists():
        return candidate
    if p.exists():
        return p
    raise ConfigError(f"no {kind} file or fixture named {value!r}", source=value)


def machine(name: str) -> MachineModel:
    return load_machine(resolve(name, "machine"))


def kernel(name: str) -> KernelSpec:
    return load_kernel(resolve(name, "kernel"))


def machines() -> Dict[str, MachineModel]:
    out = {}
    for n in machine_names():
        m = machine(n)
        out[m.name] = m
    return out


def kernels() -> Dict[str, KernelSpec]:
    out = {}
    for n in kernel_names():
        k = kernel(n)
        out[k.name] = k
    return out


def kernel_set(name: str) -> List[KernelSpec]:
    """A named kernel set, or a comma-separated list of kernel names/paths."""
    names = KERNEL_SETS.get(name)
    if names is None:
        names = [n.strip() for n in name.split(",") if n.strip()]
    if not names:
        raise ConfigError(f"empty kernel set {name!r}")
    return [kernel(n) for n in names]


def weights() -> Dict[str, float]:
    from ..validation import load_weights
    return load_weights(path("weights", "iteration_weights.csv"))


def measurements(name: str):
    from ..validation import load_measurements
    return load_measurements(path("measurements", name))


def reference() -> dict:
    return read_toml(path("reference.toml"))


def delivery_threads(machine_name: str) -> int:
    cfg = read_toml(path("kernels", "spike_delivery_scenarios.toml"))
    return int(cfg[machine_name]["threads"])


def scenarios(kernel_spec: Optional[KernelSpec] = None, machine_map=None) -> Dict[Tuple[str, str], object]:
    """Spike-delivery scenarios keyed by ("spike_delivery:<mode>", machine)."""
    from ..aux_models import Scenario, spike_delivery_scenario

    k = kernel_spec or kernel("spike_delivery")
    machine_map = machine_map or machines()
    cfg = read_toml(path("kernels", "spike_delivery_scenarios.toml"))
    out = {}
    for mname, m in machine_map.items():
        per = cfg.get(mname, {})
        for mode in Scenario:
            opts = per.get(mode.value, {})
            out[(f"{k.name}:{mode.value}", mname)] = spike_delivery_scenario(
                k, m, mode,
                effective_mem_bw_gbs=opts.get("effective_mem_bw_gbs"),
                bandwidth_note=opts.get("bandwidth_note"),
            )
    return out


@dataclass(frozen=True)
class ManifestEntry:
    file: str
    source: str
    note: str = ""

    @property
    def override_backed(self) -> bool:
        return "override-backed" in self.note


@dataclass
class FixtureManifest:
    entries: List[ManifestEntry] = field(default_factory=list)

    @classmethod
    def load(cls, manifest_path=None) -> "FixtureManifest":
        raw = read_toml(manifest_path or path("MANIFEST.toml"))
        return cls([ManifestEntry(**e) for e in raw.get("fixture", [])])

    def files(self) -> List[str]:
        return [e.file for e in self.entries]

    def sources(self) -> set:
        return {s.strip() for e in self.entries for s in e.source.split(",")}

    def problems(self, root: Optional[Path] = None) -> List[str]:
        """Listed files that are missing, data files that are unlisted, entries without a source."""
        root = root or fixtures_dir()
        out = []
        listed = set(self.files())
        for e in self.entries:
            if not e.source.strip():
                out.append(f"{e.file}: no source")
            if not (root / e.file).exists():
                out.append(f"{e.file}: listed but missing")
        for p in sorted(root.rglob("*")):
            if p.is_file() and p.suffix in (".machine", ".kernel", ".csv", ".toml") \
                    and p.name != "MANIFEST.toml":
                rel = p.relative_to(root).as_posix()
                if rel not in listed:
                    out.append(f"{rel}: not in manifest")
        return out


@dataclass(frozen=True)
class Check:
    name: str
    anchor: str
    expected: float
    actual: float
    tol: float

    @property
    def ok(self) -> bool:
        return math.isclose(self.actual, self.expected, abs_tol=self.tol + 1e-9)

    def __str__(self):
        flag = "ok" if self.ok else "MISMATCH"
        return f"{flag:8} {self.name} [{self.anchor}]: expected {self.expected:g}, got {self.actual:.4g}"


@dataclass
class VerifyReport:
    checks: List[Check] = field(default_factory=list)
    manifest_problems: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.manifest_problems and all(c.ok for c in self.checks)

    def failures(self) -> List[Check]:
        return [c for c in self.checks if not c.ok]


def verify_fixtures(tol: float = 0.1) -> VerifyReport:
    """Recompute traffic totals and contribution tuples and compare with the reference values."""
    from ..ecm import compose, contributions, multicore, predict
    from ..traffic import Residence, traffic, worst_case_random_traffic

    report = VerifyReport(manifest_problems=FixtureManifest.load().problems())
    ms, ks = machines(), kernels()
    ref = reference()

    for name, expected in ref["memory_volume"].items():
        if name == "spike_delivery_worst_case":
            got = worst_case_random_traffic(ks["spike_delivery"]).total_b
        elif name == "spike_delivery_best_case":
            got = traffic(ks["spike_delivery"]).total_b
        else:
            got = traffic(ks[name]).total_b
        report.checks.append(Check(f"{name} traffic", "tab_mem", expected, got, tol))

    labels = ("T_OL", "T_nOL", "T_L1L2", "T_L2L3", "T_Mem")
    for row in ref["contribution"]:
        k, m = ks[row["kernel"]], ms[row["machine"]]
        tag = f"{row['kernel']} {row['machine']}/{row['simd']}"
        c = contributions(k, m, row["simd"], Residence.MEM)
        for label, exp, got in zip(labels, row["contributions"], c.as_tuple()):
            report.checks.append(Check(f"{tag} {label}", row["anchor"], exp, got, tol))
        p = compose(c)
        if "predictions" in row:
            for lvl, exp, got in zip(("L1", "L2", "L3", "Mem"), row["predictions"], p.as_tuple()):
                report.checks.append(Check(f"{tag} T_ECM^{lvl}", row["anchor"], exp, got, tol))
        if "t_mem" in row:
            report.checks.append(Check(f"{tag} T_ECM^Mem", row["anchor"], row["t_mem"], p.t_mem, tol))

    for row in ref["full_socket"]:
        p = predict(ks[row["kernel"]], ms[row["machine"]], row["simd"])
        tag = f"{row['kernel']} {row['machine']}/{row['simd']}"
        report.checks.append(Check(f"{tag} serial", row["anchor"], row["serial"], p.t_mem, tol))
        report.checks.append(Check(f"{tag} n={row['threads']}", row["anchor"], row["full_socket"],
                                   multicore(p, row["threads"]), tol))
    return report
