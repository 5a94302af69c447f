"""Back-solve the CPU+DRAM constants that the default config ships with.

Instruction latencies, the non-miss instruction energies, the miss rate and
the bus cycle are fixed by hand; the cache-miss energy and the energy per
128-bit DRAM transfer are solved so the baseline lands on the reference
CPU+DRAM compute and data-transfer EDP for the 64x64 Sobel workload.

    python scripts/calibrate_cpu.py
"""
import math

from slimsim.perf import REFERENCE_EDP, Workload

TARGET_COMPUTE = REFERENCE_EDP["CPU+DRAM"]["compute"]
TARGET_TRANSFER = REFERENCE_EDP["CPU+DRAM"]["data_transfer"]

CLOCK = 3.3e9
CYCLES = {"IMUL": 3, "ADD": 1, "LOAD": 4, "STORE": 1}
ENERGY = {"IMUL": 3000.0, "ADD": 1000.0, "LOAD": 2500.0, "STORE": 2500.0}
MISS_RATE = 0.05
MISS_CYCLES = 200
BUS_WIDTH = 128
WORD_BITS = 8
TRANSFER_LATENCY = 1.25e-9


def main():
    w = Workload()
    per_op = {"IMUL": w.muls_per_op, "ADD": w.adds_per_op, "LOAD": w.loads_per_op, "STORE": w.stores_per_op}
    misses = w.kernel_ops * w.loads_per_op * MISS_RATE
    cycles = w.kernel_ops * sum(k * CYCLES[op] for op, k in per_op.items()) + misses * MISS_CYCLES
    latency = cycles / CLOCK
    base_energy = w.kernel_ops * sum(k * ENERGY[op] for op, k in per_op.items())
    miss_energy = (TARGET_COMPUTE / latency - base_energy) / misses

    transfers = math.ceil(w.kernel_ops * (w.loads_per_op + w.stores_per_op) * WORD_BITS / BUS_WIDTH)
    transfer_energy = TARGET_TRANSFER / (transfers * transfers * TRANSFER_LATENCY)

    print(f"cpu_clock_hz = {CLOCK:g}")
    for op in CYCLES:
        print(f"cpu_cycles_{op} = {CYCLES[op]}")
    for op in ENERGY:
        print(f"cpu_energy_{op}_pj = {ENERGY[op]:g}")
    print(f"cpu_miss_rate = {MISS_RATE:g}")
    print(f"cpu_miss_cycles = {MISS_CYCLES}")
    print(f"cpu_miss_energy_pj = {miss_energy:.6g}")
    print(f"cpu_bus_width = {BUS_WIDTH}")
    print(f"cpu_word_bits = {WORD_BITS}")
    print(f"dram_transfer_energy_pj = {transfer_energy:.6g}")
    print(f"dram_transfer_latency_s = {TRANSFER_LATENCY:g}")


if __name__ == "__main__":
    main()
