"""Run a range of seeded hostile scenarios and report any failed check.

    python3 scripts/adversarial.py --seeds 0 1000 --requests 8
"""
import argparse
import collections
import time

from htring.harness import run_scenario
from htring.harness.adversary import adversarial_scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, nargs=2, default=[0, 500], metavar=("FROM", "TO"))
    ap.add_argument("--requests", type=int, default=5)
    args = ap.parse_args()
    t0 = time.perf_counter()
    bad = collections.Counter()
    for seed in range(*args.seeds):
        s = adversarial_scenario(seed, args.requests)
        res = run_scenario(s)
        broken = {k: v[0] for k, v in res.verdicts.items() if v}
        if broken or res.progress:
            bad["safety" if broken else "progress"] += 1
            crashes = [(c.node, c.at, c.restart) for c in s.faults.crashes]
            print(f"seed {seed}: n={s.n} loss={s.faults.loss} crashes={crashes} "
                  f"{broken or res.progress[:2]}")
    runs = args.seeds[1] - args.seeds[0]
    print(f"{runs} runs, {bad['safety']} safety and {bad['progress']} progress failures, "
          f"{time.perf_counter() - t0:.1f}s")
    return 1 if bad else 0


if __name__ == "__main__":
    raise SystemExit(main())
