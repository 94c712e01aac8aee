"""Leader load against the classical and ring baselines along one axis.

    python3 scripts/leader_load.py --axis requests --values 100 500 1000 --out-dir out/load
    python3 scripts/leader_load.py --axis payload --values 256 1024 4096
    python3 scripts/leader_load.py --axis ring --values 3 7 11 21

Writes one trace and CSV set per point, ``sweep-<axis>.csv`` and two SVG
plots when ``--out-dir`` is given.
"""
import argparse

from htring.harness import run_sweep
from htring.harness.scenario import load_scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default="scripts/configs/basic.yaml")
    ap.add_argument("--axis", choices=("requests", "payload", "ring"), default="requests")
    ap.add_argument("--values", type=int, nargs="+", default=[100, 500, 1000])
    ap.add_argument("--out-dir")
    args = ap.parse_args()
    rows = run_sweep(load_scenario(args.config), args.axis, args.values, args.out_dir,
                     emit_plots=args.out_dir is not None)
    print(f"{args.axis:>8} {'leader msgs':>12} {'ring msgs':>10} {'classical':>10} "
          f"{'leader bytes':>13} {'ordering':>9} {'busiest':>8}")
    for r in rows:
        print(f"{r['x']:>8} {r['leader_messages']:>12} {r['ring_messages']:>10} "
              f"{r['classical_messages']:>10} {r['leader_bytes']:>13} "
              f"{r['leader_ordering_bytes']:>9} {r['busiest_node']:>8}")


if __name__ == "__main__":
    main()
