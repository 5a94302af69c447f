import itertools

import pytest

from slimsim import bitcell, device
from slimsim.bitcell import Bitcell, GateDrive, PreconditionViolation, VerifyFailure
from slimsim.device import AnalogConfig, PulseKind, SlimLevel

L = SlimLevel
BITS = (0, 1)


def cell(label):
    return Bitcell(SlimLevel.parse(label))


@pytest.mark.parametrize("start, g, cond, end, out", [
    ("11", (0, 0), 1, "11", 1),
    ("01", (1, 0), 1, "00", 0),
    ("11", (1, 1), 1, "10", 0),
    ("01", (1, 1), 0, "01", 1),
])
def test_slim_primitive(start, g, cond, end, out):
    c = cell(start)
    assert bitcell.slim_primitive(c, GateDrive(*g, cond)) == out
    assert c.state.label == end
    assert device.memory_bit(c.state) == device.memory_bit(SlimLevel.parse(start))


@pytest.mark.parametrize("a, b, expected", [(0, 0, 1), (0, 1, 0), (1, 0, 0), (1, 1, 0)])
def test_slim_nor(a, b, expected):
    for start in ("11", "01"):
        assert bitcell.slim_nor(cell(start), a, b) == expected


@pytest.mark.parametrize("start", ["10", "00"])
def test_logic_needs_absolute_state(start):
    with pytest.raises(PreconditionViolation):
        bitcell.slim_nor(cell(start), 0, 0)


@pytest.mark.parametrize("op", bitcell.CELL_OPS)
def test_cell_ops_match_boolean_oracle(op):
    for start, a, b in itertools.product(("11", "01"), BITS, BITS):
        c = cell(start)
        out = bitcell.cell_op(c, op, a, b)
        assert out == bitcell.CELL_OP_TRUTH[op](a, b)
        assert device.memory_bit(c.state) == device.memory_bit(SlimLevel.parse(start))
        assert len(c.events) <= 1


def test_cell_op_examples():
    c = cell("11")
    assert bitcell.cell_op(c, "AND", 1, 1) == 1 and c.events == []
    c = cell("11")
    assert bitcell.cell_op(c, "NAND", 1, 1) == 0 and c.state == L.S10
    c = cell("01")
    assert bitcell.cell_op(c, "OR", 0, 0) == 0 and c.state == L.S00
    with pytest.raises(ValueError):
        bitcell.cell_op_drive("XOR", 0, 1)


def test_memory_preserved_for_every_drive():
    for start, g1, g2, cond in itertools.product(("11", "01"), BITS, BITS, BITS):
        c = cell(start)
        bitcell.slim_primitive(c, GateDrive(g1, g2, cond))
        assert device.memory_bit(c.state) == device.memory_bit(SlimLevel.parse(start))


@pytest.mark.parametrize("start, bit, end, kinds", [
    ("11", 0, "01", [PulseKind.P3, PulseKind.P3]),
    ("10", 0, "01", [PulseKind.P3]),
    ("00", 0, "01", [PulseKind.P2]),
    ("01", 0, "01", []),
    ("00", 1, "11", [PulseKind.P1]),
    ("01", 1, "11", [PulseKind.P1]),
    ("10", 1, "11", [PulseKind.P2]),
    ("11", 1, "11", []),
])
def test_memory_write(start, bit, end, kinds):
    c = cell(start)
    issued = bitcell.memory_write(c, bit)
    assert c.state.label == end
    assert [e.kind for e in issued] == kinds
    assert len(issued) <= 2


@pytest.mark.parametrize("start", ["11", "10", "01", "00"])
@pytest.mark.parametrize("bit", BITS)
def test_write_idempotent_and_readback(start, bit):
    c = cell(start)
    bitcell.memory_write(c, bit)
    n = len(c.events)
    bitcell.memory_write(c, bit)
    assert len(c.events) == n
    assert bitcell.read_cell(c) == (bit, 1)


@pytest.mark.parametrize("start, end, pulses", [("10", "11", 1), ("00", "01", 1), ("11", "11", 0), ("01", "01", 0)])
def test_refresh_cell(start, end, pulses):
    c = cell(start)
    assert bitcell.refresh_cell(c) == pulses
    assert c.state.label == end
    assert bitcell.refresh_cell(c) == 0


@pytest.mark.parametrize("label, expected", [("11", (1, 1)), ("10", (1, 0)), ("00", (0, 0))])
def test_read_cell_counts_one_read(label, expected):
    c = cell(label)
    assert bitcell.read_cell(c) == expected
    assert c.reads == 1


def test_noisy_write_verify_converges():
    cfg = AnalogConfig(seed=5)
    rng = cfg.rng()
    for start in SlimLevel:
        for bit in BITS:
            c = Bitcell(start)
            bitcell.memory_write(c, bit, analog=(cfg, rng))
            assert c.state == (L.S11 if bit else L.S01)


def test_verify_failure_when_reads_lie(monkeypatch):
    # a sense amplifier stuck at '00' never confirms the target
    monkeypatch.setattr(device, "decode_conductance", lambda g, cfg: L.S00)
    cfg = AnalogConfig()
    c = Bitcell(L.S00)
    with pytest.raises(VerifyFailure):
        bitcell.memory_write(c, 0, analog=(cfg, cfg.rng()))
    assert len(c.events) == bitcell.MAX_VERIFY_PULSES
