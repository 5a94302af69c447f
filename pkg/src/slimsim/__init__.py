"""Behavioral simulator for simultaneous logic-in-memory on 4-level OxRAM bitcells."""
from .device import SlimLevel, Pulse, PulseKind, AnalogConfig, apply_pulse, decode
from .bitcell import Bitcell, GateDrive
from .array import Address, ArrayGeometry, SlimArray, parallel_capacity
from .compiler import NorNetlist, netlist_for, build_ripple_adder, build_csa_multiplier, schedule, execute
from .perf import EdpReport, SlimPerfParams, Workload, slim_workload_edp, cpu_workload_edp

__version__ = "0.1.0"
