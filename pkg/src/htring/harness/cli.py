"""Command line: ``htring run | sweep | replay``.

Exit codes: 0 success, 1 usage or config error, 2 safety violation,
3 progress-check failure.
"""
from __future__ import annotations

import argparse
import sys
from typing import List, Optional

from ..simnet import TraceError
from .checks import SAFETY_CHECKS
from .run import (EXIT_OK, EXIT_PROGRESS, EXIT_SAFETY, EXIT_USAGE, SWEEP_AXES, SweepAborted,
                  replay, run_scenario, run_sweep)
from .scenario import ScenarioError, load_scenario


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="htring", description="Seeded HT-Ring Paxos simulator")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run one scenario")
    run.add_argument("--config", required=True)
    run.add_argument("--seed", type=int)
    run.add_argument("--out-dir")
    run.add_argument("--emit-plots", action="store_true", help="ignored for single runs")
    run.add_argument("--check-only", action="store_true",
                     help="print verdicts only; write no files")

    sw = sub.add_parser("sweep", help="one run per axis value")
    sw.add_argument("--config", required=True)
    sw.add_argument("--axis", choices=SWEEP_AXES, required=True)
    sw.add_argument("--values", required=True, help="comma-separated integers")
    sw.add_argument("--seed", type=int)
    sw.add_argument("--out-dir")
    sw.add_argument("--emit-plots", action="store_true")
    sw.add_argument("--check-only", action="store_true")

    rp = sub.add_parser("replay", help="re-check a saved trace")
    rp.add_argument("trace")
    rp.add_argument("--check-only", action="store_true", help="accepted for symmetry")
    return p


def _print_verdicts(verdicts, out):
    for name in SAFETY_CHECKS:
        bad = verdicts[name]
        if bad:
            where = ", ".join(str(i) for i, _ in bad[:5])
            print(f"check {name}: FAIL at {where}: {bad[0][1]}", file=out)
        else:
            print(f"check {name}: ok", file=out)


def _cmd_run(args, out) -> int:
    s = load_scenario(args.config)
    if args.seed is not None:
        s.seed = args.seed
    res = run_scenario(s, None if args.check_only else args.out_dir)
    if not args.check_only:
        for k, v in res.summary.items():
            print(f"{k}: {v}", file=out)
    _print_verdicts(res.verdicts, out)
    for line in res.progress[:5]:
        print(f"progress: {line}", file=out)
    return res.exit_code


def _cmd_sweep(args, out) -> int:
    s = load_scenario(args.config)
    if args.seed is not None:
        s.seed = args.seed
    try:
        values = [int(v) for v in args.values.split(",") if v.strip()]
    except ValueError:
        raise ScenarioError("--values must be comma-separated integers") from None
    try:
        rows = run_sweep(s, args.axis, values, None if args.check_only else args.out_dir,
                         args.emit_plots)
    except SweepAborted as e:
        print(str(e), file=out)
        _print_verdicts(e.result.verdicts, out)
        return EXIT_SAFETY
    for r in rows:
        print(f"{args.axis}={r['x']}: leader msgs {r['leader_messages']} bytes "
              f"{r['leader_bytes']} | classical {r['classical_messages']}/"
              f"{r['classical_bytes']} | ring {r['ring_messages']}/{r['ring_bytes']} | "
              f"learned {r['learned']}", file=out)
    return EXIT_PROGRESS if any(r["progress_failures"] for r in rows) and \
        s.expect_progress else EXIT_OK


def _cmd_replay(args, out) -> int:
    with open(args.trace) as fh:
        text = fh.read()
    verdicts = replay(text)
    _print_verdicts(verdicts, out)
    return EXIT_SAFETY if any(verdicts.values()) else EXIT_OK


def main(argv: Optional[List[str]] = None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return {"run": _cmd_run, "sweep": _cmd_sweep, "replay": _cmd_replay}[args.cmd](args, out)
    except (ScenarioError, TraceError, OSError) as e:
        print(f"htring: error: {e}", file=sys.stderr)
        return EXIT_USAGE
