"""Four-level resistance ladder of the bilayer OxRAM and its analog read-out.

Levels are ordered by conductance: 3 ('11') > 2 ('10') > 1 ('01') > 0 ('00').
The upper bit of the label is the memory bit (LRS/HRS sense region), the
lower bit is the logic bit.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .config import load_keyvalue


class SlimLevel(enum.IntEnum):
    S00 = 0
    S01 = 1
    S10 = 2
    S11 = 3

    @property
    def label(self) -> str:
        return format(int(self), "02b")

    @classmethod
    def parse(cls, label: str) -> "SlimLevel":
        if label not in ("00", "01", "10", "11"):
            raise ValueError(f"not a SLIM state label: {label!r}")
        return cls(int(label, 2))

    def __str__(self) -> str:
        return self.label


ABSOLUTE_STATES = frozenset({SlimLevel.S11, SlimLevel.S01})


def memory_bit(level: int) -> int:
    return int(level >= 2)


def logic_bit(level: int) -> int:
    return int(level) % 2


def is_absolute(level: int) -> bool:
    return int(level) % 2 == 1


def decode(level: int) -> tuple[int, int]:
    """Return ``(memory_bit, logic_bit)`` from a single read of ``level``."""
    return memory_bit(level), logic_bit(level)


class PulseKind(enum.Enum):
    P1 = "P1"  # strong SET, absorbing at '11'
    P2 = "P2"  # weak SET, one rung up (refresh)
    P3 = "P3"  # RESET, one rung down


PULSE_WIDTH = 7e-3


@dataclass(frozen=True)
class Pulse:
    kind: PulseKind
    amplitude: float | None = None  # volts; carried as metadata only
    width: float = PULSE_WIDTH

    @property
    def increases_conductance(self) -> bool:
        return self.kind in (PulseKind.P1, PulseKind.P2)

    @classmethod
    def parse(cls, name: str) -> "Pulse":
        try:
            return cls(PulseKind(name.upper()))
        except ValueError:
            raise ValueError(f"unknown pulse {name!r}, expected P1, P2 or P3") from None


P1 = Pulse(PulseKind.P1)
P2 = Pulse(PulseKind.P2)
P3 = Pulse(PulseKind.P3)


def apply_pulse(state: int, pulse: Pulse | PulseKind) -> SlimLevel:
    kind = pulse.kind if isinstance(pulse, Pulse) else pulse
    level = int(state)
    if kind is PulseKind.P1:
        return SlimLevel.S11
    if kind is PulseKind.P2:
        return SlimLevel(min(level + 1, 3))
    return SlimLevel(max(level - 1, 0))


def apply_pulse_array(levels: np.ndarray, kind: PulseKind) -> np.ndarray:
    """Vectorized :func:`apply_pulse` over an integer level array."""
    if kind is PulseKind.P1:
        return np.full_like(levels, 3)
    if kind is PulseKind.P2:
        return np.minimum(levels + 1, 3).astype(levels.dtype)
    return np.maximum(levels.astype(np.int16) - 1, 0).astype(levels.dtype)


def run_sequence(state: int, pulses) -> list[SlimLevel]:
    """Apply ``pulses`` in order and return the trajectory including the start."""
    trace = [SlimLevel(state)]
    for p in pulses:
        trace.append(apply_pulse(trace[-1], p))
    return trace


# Analog layer -----------------------------------------------------------------

# Defaults keep every band center >= 7 sigma from its thresholds at the
# worst device-to-device spread (28 nS).
DEFAULT_CENTERS = (0.2e-6, 0.6e-6, 1.0e-6, 1.4e-6)
DEFAULT_THRESHOLDS = (0.4e-6, 0.8e-6, 1.2e-6)
D2D_SIGMA = 28e-9
C2C_SIGMA = 7.35e-9


@dataclass(frozen=True)
class AnalogConfig:
    band_centers: tuple[float, float, float, float] = DEFAULT_CENTERS
    thresholds: tuple[float, float, float] = DEFAULT_THRESHOLDS
    noise_sigma: tuple[float, float, float, float] = (D2D_SIGMA,) * 4
    seed: int = 0

    def __post_init__(self):
        c, t = self.band_centers, self.thresholds
        if len(c) != 4 or len(t) != 3 or len(self.noise_sigma) != 4:
            raise ValueError("need 4 band centers, 3 thresholds and 4 sigmas")
        chain = [c[0], t[0], c[1], t[1], c[2], t[2], c[3]]
        if any(lo >= hi for lo, hi in zip(chain, chain[1:])):
            raise ValueError(f"thresholds must interleave band centers: {chain}")
        if any(s < 0 for s in self.noise_sigma):
            raise ValueError("noise sigma must be non-negative")

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)

    @classmethod
    def from_mapping(cls, values: dict[str, str]) -> "AnalogConfig":
        base = cls()
        centers = tuple(float(values.get(f"band_center_{i}", base.band_centers[i])) for i in range(4))
        thresholds = tuple(float(values.get(f"threshold_{i}", base.thresholds[i - 1])) for i in range(1, 4))
        sigmas = tuple(float(values.get(f"sigma_{i}", base.noise_sigma[i])) for i in range(4))
        return cls(centers, thresholds, sigmas, int(values.get("seed", base.seed)))

    @classmethod
    def load(cls, path) -> "AnalogConfig":
        return cls.from_mapping(load_keyvalue(path))


def conductance_of(state, cfg: AnalogConfig, rng: np.random.Generator | None = None):
    """Conductance in siemens for ``state``.

    Deterministic band center when ``rng`` is None; otherwise adds Gaussian
    noise with the per-state sigma. ``state`` may be an int or an int array.
    """
    centers = np.asarray(cfg.band_centers)
    level = np.asarray(state, dtype=np.intp)
    g = centers[level]
    if rng is not None:
        g = g + rng.normal(0.0, 1.0, size=level.shape) * np.asarray(cfg.noise_sigma)[level]
    return float(g) if np.ndim(g) == 0 else g


def decode_conductance(g, cfg: AnalogConfig):
    # side="right": a value exactly on a threshold belongs to the upper band
    level = np.searchsorted(np.asarray(cfg.thresholds), g, side="right")
    return SlimLevel(int(level)) if np.ndim(level) == 0 else level
