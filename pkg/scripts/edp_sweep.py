"""EDP comparison for the Sobel workload under each event and latency convention.

    python scripts/edp_sweep.py [--config path]
"""
import argparse

from slimsim import perf


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--config", default="default")
    args = ap.parse_args()
    w = perf.Workload()
    for events in ("exclude-refresh", "include-refresh"):
        for latency in ("staged", "raw"):
            slim_p, cpu_p = perf.load_config(args.config, include_refresh=events == "include-refresh",
                                             latency_convention=latency)
            rows = perf.comparison(perf.cpu_workload_edp(w, cpu_p), perf.slim_workload_edp(w, slim_p))
            r = rows["Ratio"]
            print(f"{events:<16} {latency:<7} SLIM overall {rows['SLIM']['overall']:.3e}  "
                  f"ratio DT {r['data_transfer']:.2f}  overall {r['overall']:.2f}")
    print("reference: SLIM overall 5.41e+03, ratio DT 783.44, overall 45.89")
    print()
    slim_p, cpu_p = perf.load_config(args.config)
    print(perf.comparison_table(perf.cpu_workload_edp(w, cpu_p), perf.slim_workload_edp(w, slim_p)), end="")


if __name__ == "__main__":
    main()
