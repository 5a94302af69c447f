"""Energy, latency and EDP models for SLIM and a CPU + DRAM baseline.

Energies are in pJ, latencies in seconds, EDP in pJ*s.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np

from . import compiler
from .array import ArrayGeometry, SlimArray, parallel_capacity
from .compiler import NorNetlist
from .config import ConfigError, load_keyvalue

# Reference EDP figures (pJ*s) for 4096 Sobel ops, printed beside the computed ones.
REFERENCE_EDP = {
    "CPU+DRAM": {"data_transfer": 1.31e-01, "compute": 2.48e05, "overall": 2.48e05},
    "SLIM": {"data_transfer": 1.68e-04, "compute": 5.41e03, "overall": 5.41e03},
    "Ratio": {"data_transfer": 783.44, "compute": 45.89, "overall": 45.89},
}

# Reference gate costs: cells, normalized energy, normalized latency.
REFERENCE_GATES = {
    "NOR": (1, 1.0, 1), "OR": (2, 2.0, 2), "NAND": (4, 2.0, 3), "AND": (3, 1.75, 2),
    "XOR": (5, 3.0, 3), "XNOR": (4, 2.75, 3), "HA": (5, 3.37, 4), "FA": (9, 6.0, 6),
}


def switch_event_energy(netlist: NorNetlist, include_refresh: bool = False) -> float:
    """Mean number of cell state transitions over all input combinations.

    Every cell starts refreshed at logic '1' and moves one rung when its
    RESET fires, so a cell switches exactly when it evaluates to 0. With
    ``include_refresh`` each switched cell also pays the P2 that restores it.
    """
    if not netlist.nodes:
        return 0.0
    xs = compiler.exhaustive_inputs(netlist)
    vals = compiler.evaluate_all(netlist, xs)
    n_combos = 2 ** len(netlist.inputs)
    events = sum(int(n_combos - vals[node.id].sum()) for node in netlist.nodes)
    if include_refresh:
        events *= 2
    return events / n_combos


def switch_events_simulated(netlist: NorNetlist, include_refresh: bool = False, seed: int = 0,
                            geometry: ArrayGeometry | None = None) -> float:
    """Recount switch events by running every input combination on a simulated array.

    Cells start in random absolute memory states; an event is any cell whose
    level differs before and after execution.
    """
    geo = geometry or ArrayGeometry()
    if not netlist.nodes:
        return 0.0
    xs = compiler.exhaustive_inputs(netlist)
    n_combos = len(next(iter(xs.values()))) if xs else 1
    copies = 1
    while copies * 2 <= min(n_combos, geo.n_mats):
        trial = copies * 2
        if netlist.cells > (geo.n_mats // trial) * geo.mat_rows * geo.mat_cols:
            break
        copies = trial
    sched = compiler.schedule(netlist, geo, copies=copies)
    rng = np.random.default_rng(seed)
    total = 0
    for start in range(0, n_combos, copies):
        chunk = {k: v[start:start + copies] for k, v in xs.items()}
        k = len(next(iter(chunk.values()))) if chunk else 1
        if k < copies:
            chunk = {name: np.pad(v, (0, copies - k)) for name, v in chunk.items()}
        arr = SlimArray(geo)
        arr.write_memory_plane(rng.integers(0, 2, size=geo.shape))
        cells = sched.addresses[:, :k].ravel()
        before = arr.levels.reshape(-1)[cells].copy()
        compiler.execute(sched, arr, chunk)
        after = arr.levels.reshape(-1)[cells]
        total += int(np.count_nonzero(before != after))
        if include_refresh:
            total += int(np.count_nonzero(after % 2 == 0))
    return total / n_combos


def latency_cycles(netlist: NorNetlist, convention: str = "raw") -> int:
    """Schedule depth; ``staged`` adds one routing cycle per arithmetic sub-block on the critical chain."""
    if convention == "raw":
        return netlist.depth()
    if convention == "staged":
        return netlist.depth() + netlist.stage_depth()
    raise ValueError(f"unknown latency convention {convention!r}")


@dataclass(frozen=True)
class SlimPerfParams:
    switching_energy_pj: float = 10.0
    read_energy_pj: float = 0.25
    switching_latency_s: float = 10e-9
    geometry: ArrayGeometry = field(default_factory=ArrayGeometry)
    pipeline_ops: int = 8
    include_refresh: bool = False
    latency_convention: str = "staged"

    def __post_init__(self):
        for name in ("switching_energy_pj", "read_energy_pj", "switching_latency_s"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be strictly positive")
        if self.latency_convention not in ("raw", "staged"):
            raise ConfigError(f"latency_convention must be raw or staged, got {self.latency_convention!r}")


CPU_OPS = ("IMUL", "ADD", "LOAD", "STORE")


@dataclass(frozen=True)
class CpuPerfParams:
    clock_hz: float
    cycles: dict[str, float]
    energy_pj: dict[str, float]
    bus_width: int = 128
    word_bits: int = 8
    miss_rate: float = 0.0
    miss_cycles: float = 0.0
    miss_energy_pj: float = 0.0
    dram_transfer_energy_pj: float = 0.0
    dram_transfer_latency_s: float = 0.0

    def __post_init__(self):
        for op in CPU_OPS:
            if op not in self.cycles:
                raise ConfigError(f"missing CPU parameter cpu_cycles_{op}")
            if op not in self.energy_pj:
                raise ConfigError(f"missing CPU parameter cpu_energy_{op}_pj")
        if self.clock_hz <= 0 or self.bus_width <= 0:
            raise ConfigError("cpu_clock_hz and cpu_bus_width must be positive")


@dataclass(frozen=True)
class Workload:
    """A batch of identical kernel operations (Sobel pixels by default)."""
    kernel_ops: int = 64 * 64
    muls_per_op: int = 9
    adds_per_op: int = 9
    loads_per_op: int = 18
    stores_per_op: int = 9
    bit_width: int = 4
    result_bits: int = 4

    def scaled(self, kernel_ops: int) -> "Workload":
        return Workload(kernel_ops, self.muls_per_op, self.adds_per_op, self.loads_per_op,
                        self.stores_per_op, self.bit_width, self.result_bits)


@dataclass
class EdpReport:
    system: str
    data_transfer_energy_pj: float = 0.0
    data_transfer_latency_s: float = 0.0
    compute_energy_pj: float = 0.0
    compute_latency_s: float = 0.0
    breakdown: dict = field(default_factory=dict)

    @property
    def data_transfer_edp(self) -> float:
        return self.data_transfer_energy_pj * self.data_transfer_latency_s

    @property
    def compute_edp(self) -> float:
        return self.compute_energy_pj * self.compute_latency_s

    @property
    def overall_edp(self) -> float:
        return self.data_transfer_edp + self.compute_edp

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(data_transfer_edp=self.data_transfer_edp, compute_edp=self.compute_edp,
                 overall_edp=self.overall_edp)
        return d


@lru_cache(maxsize=None)
def _block_costs(bit_width: int, include_refresh: bool, convention: str) -> dict[str, dict]:
    out = {}
    for kind, net in (("mul", compiler.build_csa_multiplier(bit_width)),
                      ("add", compiler.build_ripple_adder(bit_width))):
        out[kind] = {
            "netlist": net.name,
            "cells": net.cells,
            "switch_events": switch_event_energy(net, include_refresh),
            "reads": net.cells,  # one intelligent read per cell op
            "cycles": latency_cycles(net, convention),
            "raw_depth": net.depth(),
        }
    return out


def slim_workload_edp(workload: Workload, params: SlimPerfParams | None = None) -> EdpReport:
    p = params or SlimPerfParams()
    report = EdpReport("SLIM")
    if workload.kernel_ops == 0:
        return report
    blocks = _block_costs(workload.bit_width, p.include_refresh, p.latency_convention)
    capacity = parallel_capacity(p.geometry, workload.bit_width, p.pipeline_ops)
    counts = {"mul": workload.kernel_ops * workload.muls_per_op,
              "add": workload.kernel_ops * workload.adds_per_op}
    for kind, count in counts.items():
        blk = blocks[kind]
        energy = count * (blk["switch_events"] * p.switching_energy_pj + blk["reads"] * p.read_energy_pj)
        rounds = math.ceil(count / capacity)
        latency = rounds * blk["cycles"] * p.switching_latency_s
        report.compute_energy_pj += energy
        report.compute_latency_s += latency
        report.breakdown[kind] = dict(blk, count=count, rounds=rounds, energy_pj=energy, latency_s=latency)
    # only the results travel to the CPU; bits are read in parallel across the array
    bits = workload.kernel_ops * workload.result_bits
    report.data_transfer_energy_pj = bits * p.read_energy_pj
    report.data_transfer_latency_s = math.ceil(bits / p.geometry.single_bit_parallelism) * p.switching_latency_s
    report.breakdown["parallel_capacity"] = capacity
    report.breakdown["result_bits"] = bits
    return report


def cpu_workload_edp(workload: Workload, cpu: CpuPerfParams) -> EdpReport:
    report = EdpReport("CPU+DRAM")
    n = workload.kernel_ops
    if n == 0:
        return report
    per_op = {"IMUL": workload.muls_per_op, "ADD": workload.adds_per_op,
              "LOAD": workload.loads_per_op, "STORE": workload.stores_per_op}
    cycles = n * sum(k * cpu.cycles[op] for op, k in per_op.items())
    energy = n * sum(k * cpu.energy_pj[op] for op, k in per_op.items())
    misses = n * workload.loads_per_op * cpu.miss_rate
    cycles += misses * cpu.miss_cycles
    energy += misses * cpu.miss_energy_pj
    report.compute_energy_pj = energy
    report.compute_latency_s = cycles / cpu.clock_hz
    bits = n * (workload.loads_per_op + workload.stores_per_op) * cpu.word_bits
    transfers = math.ceil(bits / cpu.bus_width)
    report.data_transfer_energy_pj = transfers * cpu.dram_transfer_energy_pj
    report.data_transfer_latency_s = transfers * cpu.dram_transfer_latency_s
    report.breakdown = {"instructions": {op: n * k for op, k in per_op.items()}, "cycles": cycles,
                        "cache_misses": misses, "bus_transfers": transfers}
    return report


# Configuration ------------------------------------------------------------------

def _get(values: dict, key: str, cast=float):
    if key not in values:
        raise ConfigError(f"missing configuration key {key!r}")
    try:
        return cast(values[key])
    except ValueError:
        raise ConfigError(f"bad value for {key!r}: {values[key]!r}") from None


def cpu_params_from(values: dict) -> CpuPerfParams:
    return CpuPerfParams(
        clock_hz=_get(values, "cpu_clock_hz"),
        cycles={op: _get(values, f"cpu_cycles_{op}") for op in CPU_OPS},
        energy_pj={op: _get(values, f"cpu_energy_{op}_pj") for op in CPU_OPS},
        bus_width=_get(values, "cpu_bus_width", int),
        word_bits=_get(values, "cpu_word_bits", int),
        miss_rate=_get(values, "cpu_miss_rate"),
        miss_cycles=_get(values, "cpu_miss_cycles"),
        miss_energy_pj=_get(values, "cpu_miss_energy_pj"),
        dram_transfer_energy_pj=_get(values, "dram_transfer_energy_pj"),
        dram_transfer_latency_s=_get(values, "dram_transfer_latency_s"),
    )


def slim_params_from(values: dict, **overrides) -> SlimPerfParams:
    geo = ArrayGeometry(
        mat_rows=int(values.get("mat_rows", 8)), mat_cols=int(values.get("mat_cols", 8)),
        mats_per_bank=int(values.get("mats_per_bank", 32)), banks=int(values.get("banks", 16)))
    kw = dict(
        switching_energy_pj=float(values.get("slim_switching_energy_pj", 10.0)),
        read_energy_pj=float(values.get("slim_read_energy_pj", 0.25)),
        switching_latency_s=float(values.get("slim_switching_latency_s", 10e-9)),
        geometry=geo,
        pipeline_ops=int(values.get("slim_pipeline_ops", 8)),
        include_refresh=values.get("slim_events", "exclude-refresh") == "include-refresh",
        latency_convention=values.get("slim_latency", "staged"),
    )
    kw.update(overrides)
    return SlimPerfParams(**kw)


def load_config(path="default", **slim_overrides) -> tuple[SlimPerfParams, CpuPerfParams]:
    values = load_keyvalue(path)
    return slim_params_from(values, **slim_overrides), cpu_params_from(values)


# Reporting -------------------------------------------------------------------------

def _ratio(a: float, b: float) -> float:
    return a / b if b else float("inf")


def comparison(cpu: EdpReport, slim: EdpReport) -> dict:
    rows = {}
    for label, rep in (("CPU+DRAM", cpu), ("SLIM", slim)):
        rows[label] = {"data_transfer": rep.data_transfer_edp, "compute": rep.compute_edp,
                       "overall": rep.overall_edp}
    rows["Ratio"] = {k: _ratio(rows["CPU+DRAM"][k], rows["SLIM"][k]) for k in rows["SLIM"]}
    return rows


def comparison_json(cpu: EdpReport, slim: EdpReport) -> str:
    return json.dumps({"computed": comparison(cpu, slim), "reference": REFERENCE_EDP,
                       "reports": [cpu.to_dict(), slim.to_dict()]}, indent=2, sort_keys=True)


def comparison_table(cpu: EdpReport, slim: EdpReport) -> str:
    rows = comparison(cpu, slim)
    head = f"{'System':<10} {'Data Transfer':>14} {'Compute':>12} {'Overall':>12}   {'(reference: DT / C / O)'}"
    lines = ["Energy Delay Product (pJ*s)", head, "-" * len(head)]
    for label, row in rows.items():
        fmt = (lambda v: f"{v:.2f}") if label == "Ratio" else (lambda v: f"{v:.2E}")
        ref = REFERENCE_EDP[label]
        lines.append(f"{label:<10} {fmt(row['data_transfer']):>14} {fmt(row['compute']):>12} "
                     f"{fmt(row['overall']):>12}   {fmt(ref['data_transfer'])} / "
                     f"{fmt(ref['compute'])} / {fmt(ref['overall'])}")
    lines.append("CPU per-op constants are calibrated to the reference CPU row; SLIM figures are model-derived.")
    return "\n".join(lines) + "\n"


def gate_report(gates=("NOR", "OR", "NAND", "AND", "XOR", "XNOR", "HA", "FA"),
                include_refresh: bool = False) -> list[dict]:
    rows = []
    for g in gates:
        net = compiler.netlist_for(g)
        ref = REFERENCE_GATES.get(g, (None, None, None))
        rows.append({
            "gate": g, "cells": net.cells, "energy": switch_event_energy(net, include_refresh),
            "latency": net.depth(), "latency_staged": net.depth() + net.stage_depth(),
            "ref_cells": ref[0], "ref_energy": ref[1], "ref_latency": ref[2],
        })
    return rows


def gate_report_table(rows: list[dict]) -> str:
    head = (f"{'Op':<6} {'cells':>5} {'energy':>7} {'latency':>7} {'staged':>6}   "
            f"{'ref cells':>11} {'energy':>7} {'latency':>7}")
    lines = [head, "-" * len(head)]
    for r in rows:
        lines.append(f"{r['gate']:<6} {r['cells']:>5} {r['energy']:>7.2f} {r['latency']:>7} "
                     f"{r['latency_staged']:>6}   {r['ref_cells']!s:>11} {r['ref_energy']!s:>7} "
                     f"{r['ref_latency']!s:>7}")
    lines.append("energy = mean switch events per evaluation (NOR reads 0.75 where the reference column is normalised to 1).")
    lines.append("staged = depth plus one routing cycle per HA/FA/AND sub-block on the critical chain.")
    return "\n".join(lines) + "\n"
