"""2T-1R SLIM bitcell: memory write, single-cycle logic, read and refresh.

The two NMOS transistors are parallel paths from the OxRAM bottom electrode
to V2; a RESET pulse on V2 reaches the device iff either gate is on.
"""
from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field
from typing import NamedTuple

from . import device
from .device import AnalogConfig, PulseKind, SlimLevel


class PreconditionViolation(RuntimeError):
    """Logic operation attempted on a cell that is not in an absolute state."""


class VerifyFailure(RuntimeError):
    """Write-verify loop did not converge."""


class Terminal(enum.Enum):
    V1 = "V1"
    V2 = "V2"


class PulseEvent(NamedTuple):
    kind: PulseKind
    before: SlimLevel
    after: SlimLevel


@dataclass(frozen=True)
class GateDrive:
    g1: int
    g2: int
    pulse_condition: int = 1
    terminal: Terminal = Terminal.V2

    @property
    def resets(self) -> bool:
        return bool(self.pulse_condition and (self.g1 or self.g2))


# gate '1' = V_G 10 V (RESET path fully on); refresh uses V_G1 = V_G2 = 4 V
LOGIC_GATE_VOLTS = 10.0
REFRESH_GATE_VOLTS = 4.0
REFRESH_DRIVE = GateDrive(1, 1, 1, Terminal.V1)


@dataclass
class Bitcell:
    state: SlimLevel = SlimLevel.S01
    addr: tuple = (0, 0)
    events: list[PulseEvent] = field(default_factory=list, repr=False)
    reads: int = 0

    def __post_init__(self):
        self.state = SlimLevel(self.state)

    def pulse(self, kind: PulseKind) -> PulseEvent:
        before = self.state
        self.state = device.apply_pulse(before, kind)
        ev = PulseEvent(kind, before, self.state)
        self.events.append(ev)
        return ev

    def pulse_counts(self) -> Counter:
        return Counter(ev.kind for ev in self.events)


def sense(cell: Bitcell, analog: tuple[AnalogConfig, object] | None = None) -> SlimLevel:
    """One read of the cell's level, optionally through the noisy analog path."""
    cell.reads += 1
    if analog is None:
        return cell.state
    cfg, rng = analog
    return device.decode_conductance(device.conductance_of(cell.state, cfg, rng), cfg)


def read_cell(cell: Bitcell, analog=None) -> tuple[int, int]:
    return device.decode(sense(cell, analog))


def slim_primitive(cell: Bitcell, drive: GateDrive) -> int:
    if not device.is_absolute(cell.state):
        raise PreconditionViolation(
            f"cell {cell.addr} holds '{cell.state}', refresh to an absolute state first"
        )
    if drive.resets:
        cell.pulse(PulseKind.P3)
    return device.logic_bit(cell.state)


def slim_nor(cell: Bitcell, a: int, b: int) -> int:
    return slim_primitive(cell, GateDrive(a, b, 1))


CELL_OPS = ("NOT_A", "NOT_B", "OR", "NOR", "AND", "NAND")

CELL_OP_TRUTH = {
    "NOT_A": lambda a, b: 1 - a,
    "NOT_B": lambda a, b: 1 - b,
    "OR": lambda a, b: a | b,
    "NOR": lambda a, b: 1 - (a | b),
    "AND": lambda a, b: a & b,
    "NAND": lambda a, b: 1 - (a & b),
}


def cell_op_drive(op: str, a: int, b: int) -> GateDrive:
    """Gate and V2 assignment for a single-cell Boolean op.

    Complemented operands are taken to be free peripheral signals.
    """
    na, nb = 1 - a, 1 - b
    drives = {
        "NOT_A": (a, a, 1),
        "NOT_B": (b, b, 1),
        "OR": (na, na, nb),
        "NOR": (a, b, 1),
        "AND": (na, nb, 1),
        "NAND": (a, a, b),
    }
    try:
        g1, g2, cond = drives[op]
    except KeyError:
        raise ValueError(f"unknown op {op!r}; expected one of {CELL_OPS}") from None
    return GateDrive(g1, g2, cond)


def cell_op(cell: Bitcell, op: str, a: int, b: int = 0) -> int:
    return slim_primitive(cell, cell_op_drive(op, a, b))


MAX_VERIFY_PULSES = 4


def memory_write(cell: Bitcell, bit: int, analog=None) -> list[PulseEvent]:
    """Program the cell to '11' (bit=1) or '01' (bit=0) with read-verify.

    Returns the pulses issued.
    """
    target = SlimLevel.S11 if bit else SlimLevel.S01
    issued: list[PulseEvent] = []
    level = sense(cell, analog)
    while level != target:
        if len(issued) >= MAX_VERIFY_PULSES:
            raise VerifyFailure(f"cell {cell.addr} did not reach '{target}' after {len(issued)} pulses")
        if level > target:
            kind = PulseKind.P3
        elif target == SlimLevel.S11 and level != SlimLevel.S10:
            kind = PulseKind.P1
        else:
            kind = PulseKind.P2
        issued.append(cell.pulse(kind))
        level = sense(cell, analog)
    return issued


def refresh_cell(cell: Bitcell, analog=None) -> int:
    """Restore a post-logic state to its absolute memory state. Returns pulses issued."""
    if device.is_absolute(sense(cell, analog)):
        return 0
    cell.pulse(PulseKind.P2)
    return 1
