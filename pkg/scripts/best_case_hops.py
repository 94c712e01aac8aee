"""Best-case commit latency and response time, in hops, per submission path.

    python3 scripts/best_case_hops.py [--rings 3 5 7]
"""
import argparse

from htring.harness import run_scenario, scenario_from_dict
from htring.simnet import measure_commit_hops, measure_response_hops

# leader is node 1, node 2 is the other broadcaster, node 3 broadcasts nothing
PATHS = [
    ("at leader", "leader", None, "random"),
    ("at other broadcaster", "specific", 2, "random"),
    ("at plain coordinator, forwarded to leader", "specific", 3, "leader"),
    ("at plain coordinator, forwarded elsewhere", "specific", 3, "non_leader"),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rings", type=int, nargs="+", default=[3, 5, 7])
    args = ap.parse_args()
    print(f"{'m':>3}  {'path':<44}{'latency':>8}{'response':>9}")
    for m in args.rings:
        for label, target, node, policy in PATHS:
            s = scenario_from_dict({
                "n": 2 * m - 1, "lans": 2,
                "requests": {"count": 1, "target": target, "target_node": node},
                "protocol": {"forward_policy": policy},
            })
            res = run_scenario(s)
            lat = measure_commit_hops(res.trace, 1, s.learner_only[0])
            resp = measure_response_hops(res.trace, "r:1001.1", 1001)
            print(f"{m:>3}  {label:<44}{lat:>8}{resp:>9}")


if __name__ == "__main__":
    main()
