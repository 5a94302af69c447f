"""Endurance cycling and noisy read-out of the four conductance levels.

    python scripts/device_protocols.py --cycles 200 --samples 10000
"""
import argparse

import numpy as np

from slimsim import device
from slimsim.device import P1, P3, AnalogConfig, SlimLevel


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--cycles", type=int, default=200)
    ap.add_argument("--samples", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    seq = [P3, P3, P3, P1]
    state, trajectories = SlimLevel.S11, set()
    for _ in range(args.cycles):
        trace = device.run_sequence(state, seq)
        trajectories.add(tuple(s.label for s in trace))
        state = trace[-1]
    print(f"endurance: {args.cycles} cycles, {len(trajectories)} distinct trajectory: {' -> '.join(next(iter(trajectories)))}")

    for name, sigma in (("d2d", device.D2D_SIGMA), ("c2c", device.C2C_SIGMA), ("3x d2d", 3 * device.D2D_SIGMA)):
        cfg = AnalogConfig(noise_sigma=(sigma,) * 4, seed=args.seed)
        rng = cfg.rng()
        errs = []
        for s in SlimLevel:
            g = device.conductance_of(np.full(args.samples, int(s)), cfg, rng)
            errs.append(int(np.count_nonzero(device.decode_conductance(g, cfg) != int(s))))
        print(f"sigma {name:>6} = {sigma * 1e9:6.2f} nS: decode errors per state (00,01,10,11) {errs}")


if __name__ == "__main__":
    main()
