"""SLIM array organisation (banks of 8x8 Mats) and its controller.

State lives in one ``uint8`` level array of shape (banks, mats, rows, cols).
Each Mat carries a Tag-byte, bit ``r`` set when row ``r`` may hold
post-logic (non-absolute) states.
"""
from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import bitcell, device
from .bitcell import Bitcell, GateDrive
from .device import PulseKind, SlimLevel


class AddressOutOfBounds(IndexError):
    pass


class Mode(enum.Enum):
    MEMORY = "memory"
    LOGIC = "logic"
    READ = "read"


class RefreshPolicy(enum.Enum):
    LAZY = "lazy"
    EAGER = "eager"


@dataclass(frozen=True)
class ArrayGeometry:
    mat_rows: int = 8
    mat_cols: int = 8
    mats_per_bank: int = 32
    banks: int = 16

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return (self.banks, self.mats_per_bank, self.mat_rows, self.mat_cols)

    @property
    def n_mats(self) -> int:
        return self.banks * self.mats_per_bank

    @property
    def n_cells(self) -> int:
        return self.n_mats * self.mat_rows * self.mat_cols

    @property
    def single_bit_parallelism(self) -> int:
        # one row per Mat per cycle
        return self.n_mats * self.mat_cols


@dataclass(frozen=True, order=True)
class Address:
    bank: int
    mat: int
    row: int
    col: int

    def check(self, geo: ArrayGeometry) -> "Address":
        bounds = (geo.banks, geo.mats_per_bank, geo.mat_rows, geo.mat_cols)
        for name, idx, n in zip(("bank", "mat", "row", "col"), self.astuple(), bounds):
            if not 0 <= idx < n:
                raise AddressOutOfBounds(f"{name} index {idx} outside [0, {n}) in {self}")
        return self

    def astuple(self) -> tuple[int, int, int, int]:
        return (self.bank, self.mat, self.row, self.col)

    def flat(self, geo: ArrayGeometry) -> int:
        return int(np.ravel_multi_index(self.astuple(), geo.shape))

    @classmethod
    def from_flat(cls, index: int, geo: ArrayGeometry) -> "Address":
        return cls(*(int(i) for i in np.unravel_index(index, geo.shape)))

    def __str__(self) -> str:
        return f"{self.bank}.{self.mat}.{self.row}.{self.col}"

    @classmethod
    def parse(cls, text: str) -> "Address":
        parts = text.replace(",", ".").split(".")
        if len(parts) != 4:
            raise ValueError(f"address must be bank.mat.row.col, got {text!r}")
        return cls(*(int(p) for p in parts))


def parallel_capacity(geometry: ArrayGeometry, op_bit_width: int, pipeline_ops: int = 1) -> int:
    """Number of ``op_bit_width``-bit operations that can run concurrently.

    ``pipeline_ops`` is how many such operations share the pipeline at once;
    4-bit ops eight deep on the default geometry give 4096 / (4 * 8) = 128.
    """
    if op_bit_width < 1 or pipeline_ops < 1:
        raise ValueError("op_bit_width and pipeline_ops must be >= 1")
    return max(geometry.single_bit_parallelism // (op_bit_width * pipeline_ops), 1)


ALL_DIRTY = 0xFF


class SlimArray:
    def __init__(self, geometry: ArrayGeometry | None = None, policy: RefreshPolicy | str = RefreshPolicy.LAZY,
                 fill: SlimLevel = SlimLevel.S01):
        self.geometry = geometry or ArrayGeometry()
        if self.geometry.mat_rows > 8:
            raise ValueError("a Tag-byte tracks at most 8 rows")
        self.policy = RefreshPolicy(policy)
        self.levels = np.full(self.geometry.shape, int(fill), dtype=np.uint8)
        self.tags = np.zeros(self.geometry.shape[:2], dtype=np.uint8)
        self.stats: Counter = Counter()
        self._full_tag = (1 << self.geometry.mat_rows) - 1

    # -- planes ----------------------------------------------------------
    def memory_plane(self) -> np.ndarray:
        return (self.levels >= 2).astype(np.uint8)

    def logic_plane(self) -> np.ndarray:
        return (self.levels % 2).astype(np.uint8)

    def level(self, addr: Address) -> SlimLevel:
        return SlimLevel(int(self.levels[addr.check(self.geometry).astuple()]))

    def tag_sound(self) -> bool:
        """True iff every row tagged clean holds only absolute states."""
        rows = self.geometry.mat_rows
        dirty = (self.tags[..., None] >> np.arange(rows, dtype=np.uint8)) & 1
        row_absolute = np.all(self.levels % 2 == 1, axis=-1)
        return bool(np.all(row_absolute | (dirty == 1)))

    # -- single-cell commands ---------------------------------------------
    def _cell(self, addr: Address) -> Bitcell:
        return Bitcell(SlimLevel(int(self.levels[addr.astuple()])), addr.astuple())

    def _commit(self, addr: Address, cell: Bitcell, mode: Mode) -> None:
        for ev in cell.events:
            if mode is Mode.LOGIC:
                if ev.kind is PulseKind.P2 and device.is_absolute(ev.before):
                    self.stats["violations"] += 1
                if ev.kind is PulseKind.P3 and not device.is_absolute(ev.before):
                    self.stats["violations"] += 1
            tag = "refresh" if (mode is Mode.LOGIC and ev.kind is PulseKind.P2) else mode.value
            self.stats[f"{tag}_{ev.kind.value}"] += 1
        self.stats["reads"] += cell.reads
        self.levels[addr.astuple()] = int(cell.state)

    def _row_dirty(self, bank: int, mat: int, row: int) -> bool:
        return bool((self.tags[bank, mat] >> row) & 1)

    def drive_at(self, addr: Address, drive: GateDrive) -> int:
        """Logic-mode command: read, refresh if needed, then fire the primitive."""
        addr.check(self.geometry)
        cell = self._cell(addr)
        if self.policy is RefreshPolicy.EAGER or self._row_dirty(addr.bank, addr.mat, addr.row):
            bitcell.refresh_cell(cell)
        out = bitcell.slim_primitive(cell, drive)
        self._commit(addr, cell, Mode.LOGIC)
        self.tags[addr.bank, addr.mat] |= 1 << addr.row
        self.stats["logic_ops"] += 1
        return out

    def logic_op_at(self, addr: Address, op: str, a: int, b: int = 0) -> int:
        return self.drive_at(addr, bitcell.cell_op_drive(op, a, b))

    def memory_write(self, addr: Address, bit: int) -> None:
        addr.check(self.geometry)
        cell = self._cell(addr)
        bitcell.memory_write(cell, bit)
        self._commit(addr, cell, Mode.MEMORY)
        self._retag_rows(addr.bank, addr.mat, [addr.row])

    def read_cell(self, addr: Address) -> tuple[int, int]:
        addr.check(self.geometry)
        cell = self._cell(addr)
        out = bitcell.read_cell(cell)
        self._commit(addr, cell, Mode.READ)
        return out

    def _retag_rows(self, bank: int, mat: int, rows: Iterable[int]) -> None:
        # a row only becomes clean once it holds absolute states throughout
        for r in rows:
            if np.all(self.levels[bank, mat, r] % 2 == 1):
                self.tags[bank, mat] &= ~np.uint8(1 << r)

    # -- word commands -----------------------------------------------------
    def _word_addrs(self, base: Address, width: int) -> list[Address]:
        base.check(self.geometry)
        if width > self.geometry.mat_cols or base.col + width > self.geometry.mat_cols:
            raise AddressOutOfBounds(f"{width}-bit word at {base} does not fit in one Mat row")
        return [Address(base.bank, base.mat, base.row, base.col + i) for i in range(width)]

    def mem_write_word(self, base: Address, bits: Sequence[int]) -> None:
        """Write ``bits`` (bit i to column base.col + i) into one Mat row."""
        for addr, bit in zip(self._word_addrs(base, len(bits)), bits):
            self.memory_write(addr, int(bit))

    def read_word(self, base: Address, width: int) -> tuple[list[int], list[int]]:
        """Return (memory bits, logic bits) of ``width`` cells from a single pass."""
        pairs = [self.read_cell(a) for a in self._word_addrs(base, width)]
        return [m for m, _ in pairs], [lg for _, lg in pairs]

    # -- refresh -------------------------------------------------------------
    def refresh_row(self, bank: int, mat: int, row: int) -> int:
        Address(bank, mat, row, 0).check(self.geometry)
        pulses = 0
        for col in range(self.geometry.mat_cols):
            addr = Address(bank, mat, row, col)
            cell = self._cell(addr)
            pulses += bitcell.refresh_cell(cell)
            self._commit(addr, cell, Mode.LOGIC)
        self.tags[bank, mat] &= ~np.uint8(1 << row)
        self.stats["row_refreshes"] += 1
        return pulses

    def refresh_policy_tick(self) -> int:
        """Refresh every Mat whose rows are all tagged dirty, one row per cycle.

        Returns the number of rows refreshed.
        """
        full = np.argwhere(self.tags == self._full_tag)
        rows = 0
        for bank, mat in full:
            lv = self.levels[bank, mat]
            stale = lv % 2 == 0
            n = int(stale.sum())
            lv[stale] += 1
            self.stats["refresh_P2"] += n
            self.stats["reads"] += lv.size
            self.tags[bank, mat] = 0
            rows += self.geometry.mat_rows
        self.stats["row_refreshes"] += rows
        return rows

    # -- batched logic ---------------------------------------------------------
    def drive_batch(self, flat: np.ndarray, g1: np.ndarray, g2: np.ndarray, cond: np.ndarray) -> np.ndarray:
        """Vectorized :meth:`drive_at` over distinct flat cell indices.

        Returns the logic bits left in the cells.
        """
        flat = np.asarray(flat, dtype=np.intp)
        lv = self.levels.reshape(-1)
        bank, mat, row, _ = np.unravel_index(flat, self.geometry.shape)
        if self.policy is RefreshPolicy.EAGER:
            checked = np.ones(flat.shape, dtype=bool)
        else:
            checked = ((self.tags[bank, mat] >> row.astype(np.uint8)) & 1).astype(bool)
        self.stats["reads"] += int(checked.sum())
        cur = lv[flat]
        stale = checked & (cur % 2 == 0)
        cur = np.where(stale, cur + 1, cur)
        self.stats["refresh_P2"] += int(stale.sum())
        if np.any(cur % 2 == 0):
            raise bitcell.PreconditionViolation("logic op on a non-absolute cell in a clean-tagged row")
        fire = (np.asarray(cond) & (np.asarray(g1) | np.asarray(g2))).astype(bool)
        cur = np.where(fire, cur - 1, cur).astype(np.uint8)
        self.stats["logic_P3"] += int(fire.sum())
        self.stats["logic_ops"] += flat.size
        lv[flat] = cur
        np.bitwise_or.at(self.tags, (bank, mat), (1 << row).astype(np.uint8))
        return cur % 2

    def read_logic(self, flat: np.ndarray) -> np.ndarray:
        flat = np.asarray(flat, dtype=np.intp)
        self.stats["reads"] += flat.size
        return self.levels.reshape(-1)[flat] % 2

    def read_memory(self, flat: np.ndarray) -> np.ndarray:
        flat = np.asarray(flat, dtype=np.intp)
        self.stats["reads"] += flat.size
        return (self.levels.reshape(-1)[flat] >= 2).astype(np.uint8)

    def write_memory_plane(self, bits: np.ndarray) -> None:
        """Bulk Memory-Write of a full plane; every cell lands on '11' or '01'."""
        bits = np.asarray(bits).reshape(self.geometry.shape).astype(bool)
        target = np.where(bits, 3, 1).astype(np.uint8)
        changed = self.levels != target
        self.stats["reads"] += self.levels.size
        self.stats["memory_writes"] += int(changed.sum())
        self.levels[...] = target
        self.tags[...] = 0

    # -- text dump -------------------------------------------------------------
    def dumps(self) -> str:
        lines = []
        for bank in range(self.geometry.banks):
            for mat in range(self.geometry.mats_per_bank):
                symbols = "".join(format(int(v), "02b") for v in self.levels[bank, mat].reshape(-1))
                lines.append(f"{bank}:{mat} {symbols} {int(self.tags[bank, mat]):02x}")
        return "\n".join(lines) + "\n"

    def dump(self, path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def loads(cls, text: str, geometry: ArrayGeometry | None = None, policy="lazy") -> "SlimArray":
        arr = cls(geometry, policy)
        cells = arr.geometry.mat_rows * arr.geometry.mat_cols
        seen = 0
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            try:
                where, symbols, tag = line.split()
                bank, mat = (int(x) for x in where.split(":"))
            except ValueError:
                raise ValueError(f"line {lineno}: expected 'bank:mat symbols tag'") from None
            if len(symbols) != 2 * cells:
                raise ValueError(f"line {lineno}: expected {cells} two-bit state symbols")
            vals = [int(symbols[i:i + 2], 2) for i in range(0, len(symbols), 2)]
            arr.levels[bank, mat] = np.array(vals, dtype=np.uint8).reshape(arr.geometry.shape[2:])
            arr.tags[bank, mat] = int(tag, 16)
            seen += 1
        if seen != arr.geometry.n_mats:
            raise ValueError(f"dump lists {seen} Mats, geometry has {arr.geometry.n_mats}")
        return arr

    @classmethod
    def load(cls, path, geometry=None, policy="lazy") -> "SlimArray":
        return cls.loads(Path(path).read_text(), geometry, policy)
