"""Cells, mean switch events and latency for every library gate.

Prints the analytic and array-simulated event counts side by side, with and
without refresh pulses, next to the reference column.

    python scripts/gate_costs.py
"""
from slimsim import compiler, perf


def main():
    print(f"{'gate':<5} {'cells':>5} {'events':>7} {'sim':>7} {'+refresh':>9} {'depth':>5} {'staged':>6}   ref (cells/energy/latency)")
    for g in compiler.GATES:
        net = compiler.netlist_for(g)
        ev = perf.switch_event_energy(net)
        sim = perf.switch_events_simulated(net, seed=0)
        ev_r = perf.switch_event_energy(net, include_refresh=True)
        ref = perf.REFERENCE_GATES.get(g)
        print(f"{g:<5} {net.cells:>5} {ev:>7.3f} {sim:>7.3f} {ev_r:>9.3f} {net.depth():>5} "
              f"{net.depth() + net.stage_depth():>6}   {ref}")
    for name in ("ADD4", "MUL4", "ADD8", "ABSDIFF8"):
        net = compiler.compile_block(name)
        print(f"{name:<8} cells={net.cells} events={perf.switch_event_energy(net) if len(net.inputs) <= 16 else float('nan'):.3f} "
              f"depth={net.depth()} staged={net.depth() + net.stage_depth()}")


if __name__ == "__main__":
    main()
