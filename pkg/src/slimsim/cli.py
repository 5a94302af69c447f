"""Command-line entry point: ``slimsim <command> ...``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import app, compiler, device, perf
from .array import Address, SlimArray
from .bitcell import CELL_OPS
from .config import ConfigError


def _array(args) -> SlimArray:
    if args.state and Path(args.state).exists():
        return SlimArray.load(args.state, policy=args.refresh)
    return SlimArray(policy=args.refresh)


def _save(args, arr: SlimArray) -> None:
    if args.state:
        arr.dump(args.state)


def cmd_pulse(args) -> int:
    start = device.SlimLevel.parse(args.start)
    pulses = [device.Pulse.parse(p) for p in args.pulses] * args.repeat
    trace = device.run_sequence(start, pulses)
    print(" -> ".join(s.label for s in trace))
    mem, logic = device.decode(trace[-1])
    print(f"final '{trace[-1]}': memory={mem} logic={logic}")
    return 0


def cmd_write(args) -> int:
    arr = _array(args)
    base = Address.parse(args.address)
    bits = [int(c) for c in reversed(args.bits)]  # written MSB first on the command line
    if any(b not in (0, 1) for b in bits):
        raise ValueError("bits must be a string of 0/1")
    arr.mem_write_word(base, bits)
    _save(args, arr)
    print(f"wrote {args.bits} at {base}")
    return 0


def cmd_read(args) -> int:
    arr = _array(args)
    mem, logic = arr.read_word(Address.parse(args.address), args.width)
    print("memory " + "".join(map(str, reversed(mem))))
    print("logic  " + "".join(map(str, reversed(logic))))
    return 0


def cmd_logic(args) -> int:
    arr = _array(args)
    addr = Address.parse(args.address)
    out = arr.logic_op_at(addr, args.op.upper(), args.a, args.b)
    _save(args, arr)
    print(f"{args.op.upper()}({args.a}, {args.b}) = {out}; cell now '{arr.level(addr)}'")
    return 0


def cmd_compile(args) -> int:
    net = compiler.compile_block(args.block)
    sched = compiler.schedule(net, copies=args.copies)
    text = compiler.to_text(net, sched)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    print(f"# {net.cells} cells, depth {sched.depth}, staged depth {net.depth() + net.stage_depth()}",
          file=sys.stderr if not args.out else sys.stdout)
    return 0


def cmd_gate_report(args) -> int:
    rows = perf.gate_report(include_refresh=args.events == "include-refresh")
    print(json.dumps(rows, indent=2) if args.json else perf.gate_report_table(rows), end="" if not args.json else "\n")
    return 0


def _params(args):
    overrides = {"include_refresh": args.events == "include-refresh"} if args.events else {}
    if getattr(args, "latency", None):
        overrides["latency_convention"] = args.latency
    return perf.load_config(args.config, **overrides)


def cmd_edp(args) -> int:
    slim_p, cpu_p = _params(args)
    w = perf.Workload(kernel_ops=args.ops)
    cpu, slim = perf.cpu_workload_edp(w, cpu_p), perf.slim_workload_edp(w, slim_p)
    if args.report:
        Path(args.report).write_text(perf.comparison_json(cpu, slim) + "\n")
    print(perf.comparison_json(cpu, slim) if args.json else perf.comparison_table(cpu, slim), end="")
    if args.json:
        print()
    return 0


def cmd_sobel(args) -> int:
    slim_p, cpu_p = _params(args)
    img = app.load_pgm(args.input)
    img4 = app.quantize_4bit(img) if img.bit_depth == 8 else img
    arr = SlimArray(slim_p.geometry, policy=args.refresh)
    out, slim = app.sobel_slim(img4, args.kernel, arr, slim_p)
    cpu = perf.cpu_workload_edp(app.sobel_workload(img4, args.kernel), cpu_p)
    if args.verify:
        ref = app.sobel_reference(img4, args.kernel)
        if out != ref:
            print("SLIM output differs from the reference convolution", file=sys.stderr)
            return 1
    if args.out:
        app.save_pgm(out, args.out)
    header = f"Sobel {args.kernel} on {img.width}x{img.height}, 4-bit, zero-padded borders, refresh={args.refresh}\n"
    if args.report:
        Path(args.report).write_text(perf.comparison_json(cpu, slim) + "\n")
    print(header + perf.comparison_table(cpu, slim), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slimsim", description="Simultaneous logic-in-memory simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_array(p):
        p.add_argument("--state", help="array dump file to load from and save to")
        p.add_argument("--refresh", choices=["lazy", "eager"], default="lazy")

    def with_config(p):
        p.add_argument("--config", default="default", help="key=value config file or 'default'")
        p.add_argument("--events", choices=["exclude-refresh", "include-refresh"])
        p.add_argument("--latency", choices=["raw", "staged"])
        p.add_argument("--report", help="write the JSON report here")

    p = sub.add_parser("pulse", help="apply a pulse sequence to one cell and print the state trace")
    p.add_argument("pulses", nargs="+", help="P1, P2 or P3")
    p.add_argument("--start", default="01")
    p.add_argument("--repeat", type=int, default=1)
    p.set_defaults(func=cmd_pulse)

    p = sub.add_parser("write", help="memory-write a bit string (MSB first) at bank.mat.row.col")
    p.add_argument("address")
    p.add_argument("bits")
    with_array(p)
    p.set_defaults(func=cmd_write)

    p = sub.add_parser("read", help="read memory and logic planes of a word")
    p.add_argument("address")
    p.add_argument("--width", type=int, default=1)
    with_array(p)
    p.set_defaults(func=cmd_read)

    p = sub.add_parser("logic", help="run a single-cell Boolean op at an address")
    p.add_argument("address")
    p.add_argument("op", choices=[o.lower() for o in CELL_OPS] + list(CELL_OPS), metavar="op")
    p.add_argument("a", type=int, choices=[0, 1])
    p.add_argument("b", type=int, choices=[0, 1], nargs="?", default=0)
    with_array(p)
    p.set_defaults(func=cmd_logic)

    p = sub.add_parser("compile", help="emit netlist and schedule for a gate or block (AND, FA, ADD4, MUL4, ...)")
    p.add_argument("block")
    p.add_argument("--copies", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("gate-report", help="cells, switch energy and latency per library gate")
    p.add_argument("--events", choices=["exclude-refresh", "include-refresh"], default="exclude-refresh")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_gate_report)

    p = sub.add_parser("sobel", help="edge detection on a PGM image through the SLIM array")
    p.add_argument("input")
    p.add_argument("--out")
    p.add_argument("--kernel", choices=list(app.KERNELS), default="gx")
    p.add_argument("--refresh", choices=["lazy", "eager"], default="lazy")
    p.add_argument("--verify", action="store_true", help="also check against the reference convolution")
    with_config(p)
    p.set_defaults(func=cmd_sobel)

    p = sub.add_parser("edp", help="EDP comparison of SLIM vs CPU+DRAM for the Sobel workload")
    p.add_argument("--ops", type=int, default=64 * 64, help="number of Sobel operations")
    p.add_argument("--json", action="store_true")
    with_config(p)
    p.set_defaults(func=cmd_edp)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, IndexError, OSError, compiler.CapacityExceeded) as exc:
        print(f"slimsim {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
