"""NOR-based logic synthesis onto SLIM cells, scheduling and execution.

Every node is one cell op computing ``not (cond and (s1 or s2))``. Signals
are named by strings: primary inputs (``a``), their free peripheral
complements (``~a``), the constants ``0``/``1`` and node ids (``n7``).
"""
from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .array import Address, ArrayGeometry, SlimArray


class CapacityExceeded(RuntimeError):
    pass


class NetlistError(ValueError):
    pass


@dataclass(frozen=True)
class Node:
    id: str
    gates: tuple[str, str]
    cond: str | None = None
    block: int | None = None  # arithmetic sub-block (AND, HA, FA) this cell belongs to

    @property
    def sources(self) -> tuple[str, ...]:
        return self.gates if self.cond is None else (*self.gates, self.cond)

    @property
    def op(self) -> str:
        if self.cond is not None:
            return "CNOR"
        return "INV" if self.gates[0] == self.gates[1] else "NOR"


@dataclass(frozen=True)
class NorNetlist:
    name: str
    inputs: tuple[str, ...]
    nodes: tuple[Node, ...]
    outputs: tuple[tuple[str, str], ...]  # (output name, driving signal)

    def __post_init__(self):
        seen = set(self.inputs) | {"~" + i for i in self.inputs} | {"0", "1"}
        for node in self.nodes:
            for s in node.sources:
                if s not in seen:
                    raise NetlistError(f"{self.name}: node {node.id} reads {s!r} before it is defined")
            if node.id in seen:
                raise NetlistError(f"{self.name}: duplicate signal {node.id!r}")
            seen.add(node.id)
        for name, sig in self.outputs:
            if sig not in seen:
                raise NetlistError(f"{self.name}: output {name} driven by unknown signal {sig!r}")

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def cells(self) -> int:
        return len(self.nodes)

    @property
    def output_names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.outputs)

    def levels(self) -> dict[str, int]:
        """ASAP level of every node, primaries at level 0."""
        lvl: dict[str, int] = {}
        for node in self.nodes:
            lvl[node.id] = 1 + max(lvl.get(s, 0) for s in node.sources)
        return lvl

    def depth(self) -> int:
        return max(self.levels().values(), default=0)

    def stage_depth(self) -> int:
        """Longest chain of arithmetic sub-blocks (AND / HA / FA) feeding one another.

        Cells outside any block are transparent.
        """
        owner = {n.id: n.block for n in self.nodes}
        reach: dict[str, int] = {}
        stage: dict[int, int] = {}
        for node in self.nodes:
            ext = max((reach.get(s, 0) for s in node.sources
                       if node.block is None or owner.get(s) != node.block), default=0)
            if node.block is None:
                reach[node.id] = ext
            else:
                stage[node.block] = max(stage.get(node.block, 0), ext + 1)
                reach[node.id] = stage[node.block]
        return max(stage.values(), default=0)


class NetlistBuilder:
    def __init__(self, name: str, inputs: Sequence[str]):
        self.name = name
        self.inputs = tuple(inputs)
        self.nodes: list[Node] = []
        self._block: int | None = None
        self._n_blocks = 0

    def nor(self, x: str, y: str, cond: str | None = None) -> str:
        nid = f"n{len(self.nodes)}"
        self.nodes.append(Node(nid, (x, y), cond, self._block))
        return nid

    @contextmanager
    def block(self):
        outer = self._block
        if outer is None:
            self._block = self._n_blocks
            self._n_blocks += 1
        try:
            yield
        finally:
            self._block = outer

    def inv(self, x: str) -> str:
        return self.nor(x, x)

    def build(self, outputs) -> NorNetlist:
        if isinstance(outputs, Mapping):
            outputs = outputs.items()
        return NorNetlist(self.name, self.inputs, tuple(self.nodes), tuple(outputs))


# Library blocks --------------------------------------------------------------

def and2(b: NetlistBuilder, x: str, y: str) -> str:
    with b.block():
        return b.nor(b.inv(x), b.inv(y))


def half_adder(b: NetlistBuilder, x: str, y: str) -> tuple[str, str]:
    """Five cells: the XOR network, whose third cell already holds x AND y."""
    with b.block():
        both = b.nor(b.inv(x), b.inv(y))
        neither = b.nor(x, y)
        return b.nor(both, neither), both


def full_adder(b: NetlistBuilder, x: str, y: str, c: str) -> tuple[str, str]:
    with b.block():
        return _full_adder(b, x, y, c)


def _full_adder(b, x, y, c):
    n1 = b.nor(x, y)
    n2 = b.nor(x, n1)
    n3 = b.nor(y, n1)
    xnor_xy = b.nor(n2, n3)
    n5 = b.nor(xnor_xy, c)
    n6 = b.nor(xnor_xy, n5)
    n7 = b.nor(c, n5)
    total = b.nor(n6, n7)
    carry = b.nor(n1, n5)
    return total, carry


def _add_column(b: NetlistBuilder, bits: list[str]) -> tuple[str, str | None]:
    if len(bits) == 1:
        return bits[0], None
    if len(bits) == 2:
        return half_adder(b, *bits)
    return full_adder(b, *bits)


def _gate_library() -> dict[str, Callable[[], NorNetlist]]:
    def not_():
        b = NetlistBuilder("NOT", ["a"])
        return b.build({"y": b.inv("a")})

    def nor():
        b = NetlistBuilder("NOR", ["a", "b"])
        return b.build({"y": b.nor("a", "b")})

    def or_():
        b = NetlistBuilder("OR", ["a", "b"])
        return b.build({"y": b.inv(b.nor("a", "b"))})

    def and_():
        b = NetlistBuilder("AND", ["a", "b"])
        return b.build({"y": and2(b, "a", "b")})

    def nand():
        b = NetlistBuilder("NAND", ["a", "b"])
        return b.build({"y": b.inv(and2(b, "a", "b"))})

    def xor():
        b = NetlistBuilder("XOR", ["a", "b"])
        s, _ = half_adder(b, "a", "b")
        return b.build({"y": s})

    def xnor():
        b = NetlistBuilder("XNOR", ["a", "b"])
        both = b.nor("~a", "~b")
        xor_ = b.nor(both, b.nor("a", "b"))
        return b.build({"y": b.inv(xor_)})

    def ha():
        b = NetlistBuilder("HA", ["a", "b"])
        s, c = half_adder(b, "a", "b")
        return b.build({"sum": s, "carry": c})

    def fa():
        b = NetlistBuilder("FA", ["a", "b", "c"])
        s, c = full_adder(b, "a", "b", "c")
        return b.build({"sum": s, "carry": c})

    return {"NOT": not_, "NOR": nor, "OR": or_, "AND": and_, "NAND": nand,
            "XOR": xor, "XNOR": xnor, "HA": ha, "FA": fa}


GATE_LIBRARY = _gate_library()
GATES = tuple(GATE_LIBRARY)


def netlist_for(gate: str) -> NorNetlist:
    try:
        return GATE_LIBRARY[gate.upper()]()
    except KeyError:
        raise NetlistError(f"unknown gate {gate!r}; library has {', '.join(GATES)}") from None


def _bus(prefix: str, width: int) -> list[str]:
    return [f"{prefix}{i}" for i in range(width)]


def ripple(b: NetlistBuilder, xs: Sequence[str], ys: Sequence[str], cin: str | None = None) -> tuple[list[str], str | None]:
    sums = []
    carry = cin
    for x, y in zip(xs, ys):
        bits = [x, y] + ([carry] if carry is not None else [])
        s, carry = _add_column(b, bits)
        sums.append(s)
    return sums, carry


def build_ripple_adder(width: int = 4) -> NorNetlist:
    """``width``-bit ripple-carry adder: half adder at bit 0, full adders above.

    Inputs a0.., b0.. (LSB first); outputs s0..s{width-1} and cout.
    """
    if width < 1:
        raise ValueError("adder width must be >= 1")
    a, bb = _bus("a", width), _bus("b", width)
    b = NetlistBuilder(f"ADD{width}", a + bb)
    sums, cout = ripple(b, a, bb)
    return b.build([*((f"s{i}", s) for i, s in enumerate(sums)), ("cout", cout)])


def csa_multiply(b: NetlistBuilder, xs: Sequence[str], ys: Sequence[str]) -> list[str]:
    """Carry-save array multiplier; returns ``2 * len(xs)`` product bits, LSB first."""
    n = len(xs)
    pp = [[and2(b, xs[j], ys[i]) for j in range(n)] for i in range(n)]
    sums = {j: pp[0][j] for j in range(n)}
    carries: dict[int, str] = {}
    product: list[str] = []
    for i in range(1, n):
        new_s: dict[int, str] = {}
        new_c: dict[int, str] = {}
        for w in range(i, i + n):
            bits = [pp[i][w - i]] + [d[w] for d in (sums, carries) if w in d]
            s, c = _add_column(b, bits)
            new_s[w] = s
            if c is not None:
                new_c[w + 1] = c
        product.append(sums[i - 1])
        sums, carries = new_s, new_c
    product.append(sums[n - 1])
    # final carry-propagate stage over the upper n columns
    carry = None
    for w in range(n, 2 * n):
        bits = [d[w] for d in (sums, carries) if w in d] + ([carry] if carry else [])
        if not bits:
            product.append("0")
            continue
        s, carry = _add_column(b, bits)
        product.append(s)
    return product


def build_csa_multiplier(width: int = 4) -> NorNetlist:
    """Inputs a0.., b0..; outputs p0..p{2*width-1}."""
    if width < 1:
        raise ValueError("multiplier width must be >= 1")
    a, bb = _bus("a", width), _bus("b", width)
    b = NetlistBuilder(f"MUL{width}", a + bb)
    prod = csa_multiply(b, a, bb)
    return b.build([(f"p{i}", s) for i, s in enumerate(prod)])


def build_abs_difference(width: int = 8) -> NorNetlist:
    """|p - q| for unsigned ``width``-bit p, q with p, q < 2**(width-1).

    Two's-complement subtract using the free complements of q and a constant
    carry-in, then conditional negate on the sign bit.
    """
    if width < 2:
        raise ValueError("width must be >= 2")
    p, q = _bus("p", width), _bus("q", width)
    b = NetlistBuilder(f"ABSDIFF{width}", p + q)
    diff, _ = ripple(b, p, ["~" + x for x in q], cin="1")
    sign = diff[-1]
    flipped = [half_adder(b, d, sign)[0] for d in diff]
    mag, _ = _increment(b, flipped, sign)
    return b.build([(f"d{i}", s) for i, s in enumerate(mag)])


def _increment(b: NetlistBuilder, xs: Sequence[str], inc: str) -> tuple[list[str], str]:
    out = []
    carry = inc
    for x in xs:
        s, carry = half_adder(b, x, carry)
        out.append(s)
    return out, carry


# Evaluation --------------------------------------------------------------------

def _const(value, like):
    return np.broadcast_to(np.asarray(value, dtype=np.uint8), like.shape) if like is not None else np.uint8(value)


def evaluate_all(netlist: NorNetlist, inputs: Mapping[str, object]) -> dict[str, np.ndarray]:
    """Direct Boolean evaluation; returns every signal's value (broadcast over arrays)."""
    missing = [i for i in netlist.inputs if i not in inputs]
    if missing:
        raise NetlistError(f"{netlist.name}: unbound inputs {missing}")
    shape = np.broadcast(*[np.asarray(inputs[i]) for i in netlist.inputs]).shape if netlist.inputs else ()
    one = np.ones(shape, dtype=np.uint8)
    vals: dict[str, np.ndarray] = {"0": 0 * one, "1": one}
    for name in netlist.inputs:
        v = (np.asarray(inputs[name], dtype=np.uint8) & 1) * one
        vals[name] = v
        vals["~" + name] = 1 - v
    for node in netlist.nodes:
        g = vals[node.gates[0]] | vals[node.gates[1]]
        c = vals[node.cond] if node.cond is not None else one
        vals[node.id] = 1 - (c & g)
    return vals


def evaluate(netlist: NorNetlist, inputs: Mapping[str, object]) -> dict[str, np.ndarray]:
    vals = evaluate_all(netlist, inputs)
    return {name: vals[sig] for name, sig in netlist.outputs}


def exhaustive_inputs(netlist: NorNetlist, limit: int = 20) -> dict[str, np.ndarray]:
    k = len(netlist.inputs)
    if k > limit:
        raise NetlistError(f"{netlist.name} has {k} inputs; exhaustive enumeration is capped at {limit}")
    combos = np.arange(2 ** k, dtype=np.int64)
    # first input is the most significant bit of the combo index
    return {name: ((combos >> (k - 1 - i)) & 1).astype(np.uint8) for i, name in enumerate(netlist.inputs)}


def verify_equivalence(netlist: NorNetlist, oracle: Callable[..., object], limit: int = 20) -> bool:
    """Exhaustively compare the netlist with ``oracle(*input_bits)``.

    The oracle returns one bit for single-output netlists, otherwise a
    sequence of bits in output order.
    """
    xs = exhaustive_inputs(netlist, limit)
    got = evaluate(netlist, xs)
    cols = np.stack([got[n] for n in netlist.output_names], axis=1)
    for idx in range(cols.shape[0]):
        want = oracle(*(int(xs[i][idx]) for i in netlist.inputs))
        want = np.atleast_1d(np.asarray(want, dtype=np.int64)) & 1
        if want.shape != (cols.shape[1],) or np.any(want != cols[idx]):
            return False
    return True


def bits_of(value: int, width: int) -> list[int]:
    return [(value >> i) & 1 for i in range(width)]


def int_of(bits) -> int:
    return sum(int(b) << i for i, b in enumerate(bits))


def bind_word(prefix: str, value, width: int) -> dict[str, object]:
    """Bind an integer (or integer array) to the bus ``prefix0..``."""
    value = np.asarray(value, dtype=np.int64)
    return {f"{prefix}{i}": ((value >> i) & 1).astype(np.uint8) for i in range(width)}


def word_from(outputs: Mapping[str, object], prefix: str, width: int):
    return sum(np.asarray(outputs[f"{prefix}{i}"], dtype=np.int64) << i for i in range(width))


# Scheduling ----------------------------------------------------------------------

@dataclass
class Schedule:
    netlist: NorNetlist
    geometry: ArrayGeometry
    cycles: list[list[int]]  # node indices per cycle
    addresses: np.ndarray  # (n_nodes, copies) flat cell indices
    copies: int = 1
    node_cycle: list[int] = field(default_factory=list)

    @property
    def depth(self) -> int:
        return len(self.cycles)

    def address(self, node_index: int, copy: int = 0) -> Address:
        return Address.from_flat(int(self.addresses[node_index, copy]), self.geometry)

    def routing(self) -> list[list[str]]:
        """Signals read out and re-driven as gate inputs ahead of each cycle."""
        routes = []
        for nodes in self.cycles:
            srcs = {s for i in nodes for s in self.netlist.nodes[i].sources}
            routes.append(sorted(s for s in srcs if s.startswith("n")))
        return routes


def schedule(netlist: NorNetlist, geometry: ArrayGeometry | None = None, copies: int = 1) -> Schedule:
    """ASAP-level schedule with round-robin placement across Mats.

    With ``copies`` > 1 the Mats are split into equal contiguous regions and
    the same placement is replicated in each, so ``copies`` independent
    instances run in lock-step. Nodes issued in one cycle to the same Mat
    share a row.
    """
    geo = geometry or ArrayGeometry()
    if copies < 1 or geo.n_mats % copies:
        raise ValueError(f"copies must divide the {geo.n_mats} Mats")
    region = geo.n_mats // copies
    rows, cols = geo.mat_rows, geo.mat_cols
    if netlist.cells > region * rows * cols:
        raise CapacityExceeded(f"{netlist.name} needs {netlist.cells} cells, region has {region * rows * cols}")

    lvl = netlist.levels()
    depth = max(lvl.values(), default=0)
    cycles: list[list[int]] = [[] for _ in range(depth)]
    for i, node in enumerate(netlist.nodes):
        cycles[lvl[node.id] - 1].append(i)

    free = np.full((region, rows), cols, dtype=np.int64)
    local = np.empty(netlist.cells, dtype=np.int64)
    ptr = 0
    for c, nodes in enumerate(cycles):
        if len(nodes) > region * cols:
            raise CapacityExceeded(
                f"{netlist.name}: cycle {c} issues {len(nodes)} ops, at most {region * cols} per cycle in this region")
        per_mat: dict[int, list[int]] = {}
        for j, n in enumerate(nodes):
            per_mat.setdefault((ptr + j) % region, []).append(n)
        ptr = (ptr + len(nodes)) % region
        for m, members in per_mat.items():
            fits = np.nonzero(free[m] >= len(members))[0]
            if fits.size == 0:
                raise CapacityExceeded(f"{netlist.name}: Mat {m} has no row with {len(members)} free cells in cycle {c}")
            r = int(fits[0])
            for n in members:
                col = cols - free[m, r]
                free[m, r] -= 1
                local[n] = (m * rows + r) * cols + col
    per_copy = region * rows * cols
    addresses = local[:, None] + per_copy * np.arange(copies, dtype=np.int64)[None, :]
    node_cycle = [lvl[node.id] - 1 for node in netlist.nodes]
    return Schedule(netlist, geo, cycles, addresses, copies, node_cycle)


def execute(sched: Schedule, array: SlimArray, inputs: Mapping[str, object]) -> dict[str, np.ndarray]:
    """Run ``sched`` on ``array``; input values are bits or per-copy bit arrays.

    Node results stay in the cells; inter-cycle operands are read back and
    re-driven onto the gates. Returns per-copy output bits.
    """
    net = sched.netlist
    if array.geometry != sched.geometry:
        raise ValueError("schedule was built for a different geometry")
    missing = [i for i in net.inputs if i not in inputs]
    if missing:
        raise NetlistError(f"{net.name}: unbound inputs {missing}")
    one = np.ones(sched.copies, dtype=np.uint8)
    vals: dict[str, np.ndarray] = {"0": 0 * one, "1": one}
    for name in net.inputs:
        v = (np.asarray(inputs[name], dtype=np.uint8) & 1) * one
        vals[name] = v
        vals["~" + name] = 1 - v
    for nodes in sched.cycles:
        group = [net.nodes[i] for i in nodes]
        g1 = np.stack([vals[n.gates[0]] for n in group])
        g2 = np.stack([vals[n.gates[1]] for n in group])
        cond = np.stack([vals[n.cond] if n.cond is not None else one for n in group])
        flat = sched.addresses[nodes]
        array.drive_batch(flat.ravel(), g1.ravel(), g2.ravel(), cond.ravel())
        out = array.read_logic(flat.ravel()).reshape(flat.shape).astype(np.uint8)
        for n, row in zip(group, out):
            vals[n.id] = row
    return {name: vals[sig] for name, sig in net.outputs}


# Text format ---------------------------------------------------------------------

def to_text(netlist: NorNetlist, sched: Schedule | None = None) -> str:
    """One node per line: ``id op gate1 gate2 cond cycle address``."""
    lines = [f"netlist {netlist.name}",
             "inputs " + " ".join(netlist.inputs),
             "outputs " + " ".join(f"{n}={s}" for n, s in netlist.outputs)]
    for i, node in enumerate(netlist.nodes):
        cycle = sched.node_cycle[i] if sched else "-"
        addr = str(sched.address(i)) if sched else "-"
        lines.append(f"{node.id} {node.op} {node.gates[0]} {node.gates[1]} {node.cond or '-'} {cycle} {addr}")
    return "\n".join(lines) + "\n"


def from_text(text: str) -> NorNetlist:
    name, inputs, outputs, nodes = None, (), (), []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *rest = line.split()
        if head == "netlist":
            name = rest[0]
        elif head == "inputs":
            inputs = tuple(rest)
        elif head == "outputs":
            outputs = tuple(tuple(item.split("=", 1)) for item in rest)
        else:
            if len(rest) < 4:
                raise NetlistError(f"malformed node line: {raw!r}")
            _op, g1, g2, cond = rest[:4]
            nodes.append(Node(head, (g1, g2), None if cond == "-" else cond))
    if name is None:
        raise NetlistError("missing 'netlist' header")
    return NorNetlist(name, inputs, tuple(nodes), outputs)


def compile_block(name: str) -> NorNetlist:
    """Library gate or arithmetic block by name: ``AND``, ``ADD4``, ``MUL4``, ``ABSDIFF8``."""
    key = name.upper()
    for prefix, builder in (("ADD", build_ripple_adder), ("MUL", build_csa_multiplier),
                            ("ABSDIFF", build_abs_difference)):
        if key.startswith(prefix) and key[len(prefix):].isdigit():
            return builder(int(key[len(prefix):]))
    return netlist_for(key)
