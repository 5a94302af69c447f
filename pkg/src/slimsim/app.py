"""Sobel edge detection on the SLIM array, with a plain integer reference."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import compiler, perf
from .array import ArrayGeometry, SlimArray, parallel_capacity
from .compiler import bind_word, word_from


@dataclass
class Image:
    pixels: np.ndarray
    bit_depth: int = 8

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=np.int64)
        if self.pixels.ndim != 2:
            raise ValueError("image must be 2-D")
        top = (1 << self.bit_depth) - 1
        if self.pixels.size and (self.pixels.min() < 0 or self.pixels.max() > top):
            raise ValueError(f"pixel values must lie in [0, {top}] at {self.bit_depth} bits")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def maxval(self) -> int:
        return (1 << self.bit_depth) - 1

    def __eq__(self, other):
        return (isinstance(other, Image) and self.bit_depth == other.bit_depth
                and np.array_equal(self.pixels, other.pixels))


# PGM --------------------------------------------------------------------------

def _tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    out, i = [], 0
    while len(out) < count:
        while i < len(data) and data[i:i + 1].isspace():
            i += 1
        if data[i:i + 1] == b"#":
            while i < len(data) and data[i:i + 1] not in (b"\n", b"\r"):
                i += 1
            continue
        j = i
        while j < len(data) and not data[j:j + 1].isspace():
            j += 1
        if j == i:
            raise ValueError("truncated PGM header")
        out.append(data[i:j])
        i = j
    return out, i


def parse_pgm(data: bytes) -> Image:
    (magic, w, h, maxval), end = _tokens(data, 4)
    w, h, maxval = int(w), int(h), int(maxval)
    if not 0 < maxval < 65536:
        raise ValueError(f"bad PGM maxval {maxval}")
    if magic == b"P2":
        values = [int(t) for t in data[end:].split()]
        px = np.array(values[:w * h], dtype=np.int64)
    elif magic == b"P5":
        dtype = np.dtype(">u2" if maxval > 255 else "u1")
        raw = data[end + 1:end + 1 + w * h * dtype.itemsize]
        px = np.frombuffer(raw, dtype=dtype).astype(np.int64)
    else:
        raise ValueError(f"not a PGM file (magic {magic!r})")
    if px.size != w * h:
        raise ValueError(f"PGM holds {px.size} pixels, header says {w}x{h}")
    return Image(px.reshape(h, w), max(maxval.bit_length(), 1))


def format_pgm(img: Image, binary: bool = True) -> bytes:
    header = f"{'P5' if binary else 'P2'}\n{img.width} {img.height}\n{img.maxval}\n".encode()
    if binary:
        dtype = np.dtype(">u2" if img.maxval > 255 else "u1")
        return header + img.pixels.astype(dtype).tobytes()
    rows = "\n".join(" ".join(str(v) for v in row) for row in img.pixels)
    return header + rows.encode() + b"\n"


def load_pgm(path) -> Image:
    return parse_pgm(Path(path).read_bytes())


def save_pgm(img: Image, path, binary: bool = True) -> None:
    Path(path).write_bytes(format_pgm(img, binary))


# Reference pipeline ---------------------------------------------------------------

SOBEL = {
    "gx": np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]]),
    "gy": np.array([[-1, -2, -1], [0, 0, 0], [1, 2, 1]]),
}
KERNELS = ("gx", "gy", "both")


def quantize_4bit(img: Image) -> Image:
    if img.bit_depth != 8:
        raise ValueError("quantize_4bit expects an 8-bit image")
    return Image(img.pixels >> 4, 4)


def _taps(pixels: np.ndarray):
    """Yield ((dy, dx), shifted) for the 3x3 neighbourhood with zero padding."""
    padded = np.pad(pixels, 1)
    h, w = pixels.shape
    for dy in range(3):
        for dx in range(3):
            yield (dy, dx), padded[dy:dy + h, dx:dx + w]


def _check_kernel(kernel: str) -> str:
    kernel = kernel.lower()
    if kernel not in KERNELS:
        raise ValueError(f"kernel must be one of {KERNELS}, got {kernel!r}")
    return kernel


def output_shift(kernel: str) -> int:
    # |G| <= 4 * maxval for one kernel, twice that for |Gx| + |Gy|
    return 3 if kernel == "both" else 2


def sobel_reference(img: Image, kernel: str = "gx") -> Image:
    """Integer Sobel with zero-padded borders.

    Responses are taken in absolute value (summed for ``both``) and shifted
    back into the input bit depth, saturating at its maximum.
    """
    kernel = _check_kernel(kernel)
    if img.height < 3 or img.width < 3:
        raise ValueError("image must be at least 3x3")
    names = ("gx", "gy") if kernel == "both" else (kernel,)
    mag = np.zeros_like(img.pixels)
    for name in names:
        acc = np.zeros_like(img.pixels)
        for (dy, dx), shifted in _taps(img.pixels):
            acc += SOBEL[name][dy, dx] * shifted
        mag += np.abs(acc)
    return Image(np.minimum(mag >> output_shift(kernel), img.maxval), img.bit_depth)


# SLIM pipeline -----------------------------------------------------------------------

class SlimSobel:
    """Compiled block schedules for the SLIM Sobel datapath.

    Per pixel: one carry-save multiply per tap (operand x |coefficient|),
    ripple-carry accumulation of the positive and negative taps, and an
    absolute-difference block. Blocks run ``copies`` pixels in lock-step.
    """

    def __init__(self, geometry: ArrayGeometry | None = None, bit_width: int = 4, pipeline_ops: int = 8):
        self.geometry = geometry or ArrayGeometry()
        self.bit_width = bit_width
        self.copies = parallel_capacity(self.geometry, bit_width, pipeline_ops)
        self.acc_width = 2 * bit_width
        self.mul = compiler.schedule(compiler.build_csa_multiplier(bit_width), self.geometry, self.copies)
        self.add = compiler.schedule(compiler.build_ripple_adder(self.acc_width), self.geometry, self.copies)
        self.absdiff = compiler.schedule(compiler.build_abs_difference(self.acc_width), self.geometry, self.copies)

    def _run(self, sched, array, inputs):
        out = compiler.execute(sched, array, inputs)
        if array.policy.value == "lazy":
            array.refresh_policy_tick()
        self.block_runs[sched.netlist.name] = self.block_runs.get(sched.netlist.name, 0) + 1
        self.cycles += sched.depth
        return out

    def _mul(self, array, x, coef):
        w = self.bit_width
        out = self._run(self.mul, array, {**bind_word("a", x, w), **bind_word("b", coef, w)})
        return word_from(out, "p", 2 * w)

    def _add(self, array, x, y):
        w = self.acc_width
        out = self._run(self.add, array, {**bind_word("a", x, w), **bind_word("b", y, w)})
        return word_from(out, "s", w)

    def _absdiff(self, array, p, q):
        w = self.acc_width
        out = self._run(self.absdiff, array, {**bind_word("p", p, w), **bind_word("q", q, w)})
        return word_from(out, "d", w)

    def _magnitude(self, array, taps, kernel: np.ndarray):
        pos, neg = [], []
        for (dy, dx), x in taps:
            c = int(kernel[dy, dx])
            prod = self._mul(array, x, np.full_like(x, abs(c)))
            (neg if c < 0 else pos).append(prod)
        sums = []
        for terms in (pos, neg):
            acc = terms[0]
            for t in terms[1:]:
                acc = self._add(array, acc, t)
            sums.append(acc)
        return self._absdiff(array, *sums)

    def run(self, img: Image, kernel: str, array: SlimArray) -> np.ndarray:
        kernel = _check_kernel(kernel)
        self.block_runs: dict[str, int] = {}
        self.cycles = 0
        flat_taps = [(pos, shifted.reshape(-1)) for pos, shifted in _taps(img.pixels)]
        n = img.pixels.size
        out = np.zeros(n, dtype=np.int64)
        names = ("gx", "gy") if kernel == "both" else (kernel,)
        for start in range(0, n, self.copies):
            stop = min(start + self.copies, n)
            batch = [(pos, np.pad(v[start:stop], (0, self.copies - (stop - start)))) for pos, v in flat_taps]
            mags = [self._magnitude(array, batch, SOBEL[name]) for name in names]
            mag = mags[0] if len(mags) == 1 else self._add(array, *mags)
            # the output rescale is a bit selection, no cells involved
            out[start:stop] = (mag >> output_shift(kernel))[: stop - start]
        return out.reshape(img.pixels.shape)


def sobel_slim(img: Image, kernel: str = "gx", array: SlimArray | None = None,
               params: perf.SlimPerfParams | None = None, engine: SlimSobel | None = None):
    """Run Sobel on the simulated array. Returns (image, EdpReport)."""
    kernel = _check_kernel(kernel)
    if img.bit_depth != 4:
        raise ValueError("sobel_slim runs at 4-bit precision; quantize first")
    if img.height < 3 or img.width < 3:
        raise ValueError("image must be at least 3x3")
    params = params or perf.SlimPerfParams()
    array = array if array is not None else SlimArray(params.geometry)
    engine = engine or SlimSobel(array.geometry, 4, params.pipeline_ops)
    pixels = engine.run(img, kernel, array)
    result = Image(np.minimum(pixels, img.maxval), img.bit_depth)
    report = perf.slim_workload_edp(sobel_workload(img, kernel), params)
    report.breakdown["simulated"] = {
        "kernel": kernel, "border": "zero-padding", "block_runs": dict(engine.block_runs),
        "array_cycles": engine.cycles, "array_stats": dict(sorted(array.stats.items())),
    }
    return result, report


def sobel_workload(img: Image, kernel: str = "gx") -> perf.Workload:
    n_kernels = 2 if _check_kernel(kernel) == "both" else 1
    return perf.Workload(kernel_ops=img.pixels.size, muls_per_op=9 * n_kernels, adds_per_op=9 * n_kernels,
                         loads_per_op=18 * n_kernels, stores_per_op=9)
