"""Run Sobel on a synthetic 64x64 image through the simulated array.

Writes the input, the SLIM output and the reference output as PGM files,
checks bit-exactness and memory-plane preservation, and prints the EDP table.

    python scripts/sobel_demo.py --out-dir out/ --kernel both --refresh eager
"""
import argparse
import time
from pathlib import Path

import numpy as np

from slimsim import app, perf
from slimsim.array import SlimArray


def synthetic(size: int, seed: int) -> app.Image:
    rng = np.random.default_rng(seed)
    y, x = np.mgrid[0:size, 0:size]
    px = 2 * x + y
    px = np.where((x - size / 2) ** 2 + (y - size / 2) ** 2 < (size / 4) ** 2, 230, px)
    px = np.where((x > size * 0.7) & (y < size * 0.3), 40, px)
    return app.Image(np.clip(px + rng.integers(0, 24, size=px.shape), 0, 255), 8)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--size", type=int, default=64)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--kernel", choices=app.KERNELS, default="gx")
    ap.add_argument("--refresh", choices=["lazy", "eager"], default="lazy")
    ap.add_argument("--out-dir", default="sobel_out")
    args = ap.parse_args()

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    img = synthetic(args.size, args.seed)
    img4 = app.quantize_4bit(img)
    arr = SlimArray(policy=args.refresh)
    arr.write_memory_plane(np.random.default_rng(args.seed).integers(0, 2, size=arr.geometry.shape))
    memory = arr.memory_plane().copy()

    t0 = time.perf_counter()
    out, slim = app.sobel_slim(img4, args.kernel, arr)
    elapsed = time.perf_counter() - t0
    ref = app.sobel_reference(img4, args.kernel)
    app.save_pgm(img, out_dir / "input.pgm")
    app.save_pgm(out, out_dir / f"slim_{args.kernel}.pgm")
    app.save_pgm(ref, out_dir / f"reference_{args.kernel}.pgm")

    sim = slim.breakdown["simulated"]
    print(f"{args.size}x{args.size} {args.kernel}, refresh={args.refresh}: {elapsed:.1f}s")
    print(f"bit-exact vs reference: {out == ref}; memory plane preserved: {np.array_equal(arr.memory_plane(), memory)}")
    print(f"block runs {sim['block_runs']}, array cycles {sim['array_cycles']}")
    print(f"array stats {sim['array_stats']}")
    _, cpu_p = perf.load_config()
    print(perf.comparison_table(perf.cpu_workload_edp(app.sobel_workload(img4, args.kernel), cpu_p), slim), end="")


if __name__ == "__main__":
    main()
