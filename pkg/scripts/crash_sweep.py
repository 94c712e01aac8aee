"""Crash the leader at every event index of a small run, restart it, and check.

    python3 scripts/crash_sweep.py --requests 3 --delays 10 200
"""
import argparse

from htring.harness import Cluster, check_progress, check_trace, scenario_from_dict


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--requests", type=int, default=3)
    ap.add_argument("--delays", type=int, nargs="+", default=[10, 200])
    ap.add_argument("--node", type=int, default=1)
    args = ap.parse_args()
    s = scenario_from_dict({"n": 5, "requests": {"count": args.requests, "interval": 3}})
    probe = Cluster(s)
    probe.run()
    events = probe.sim.events_processed
    failures = 0
    for k in range(1, events + 1):
        for delay in args.delays:
            c = Cluster(s)
            c.crash_at_event(k, args.node, delay)
            trace = c.run()
            bad = {n: v[0] for n, v in check_trace(trace).items() if v}
            stuck = check_progress(trace, s.learner_sites)
            if bad or stuck:
                failures += 1
                print(f"event {k} delay {delay}: {bad or stuck[:2]}")
    print(f"{events} events x {len(args.delays)} delays, {failures} failures")
    return 1 if failures else 0


if __name__ == "__main__":
    raise SystemExit(main())
