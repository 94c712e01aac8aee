"""Scenario runs, sweeps and offline replay."""
from __future__ import annotations

import copy
import os
import tempfile
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

from ..membership import majority
from ..metrics import (NODE_COLUMNS, SUMMARY_COLUMNS, aggregate, baseline_leader_cost,
                       busiest_node, node_rows, write_csv)
from ..simnet import TraceError, dump_trace, load_trace, measure_commit_hops, measure_response_hops
from .checks import check_progress, check_trace
from .cluster import Cluster
from .scenario import Scenario, ScenarioError

EXIT_OK, EXIT_USAGE, EXIT_SAFETY, EXIT_PROGRESS = 0, 1, 2, 3


@dataclass
class RunResult:
    scenario: Scenario
    trace: List[dict]
    cluster: Cluster
    verdicts: Dict[str, list]
    progress: List[str]
    summary: dict
    node_csv: str
    trace_text: str = ""

    @property
    def safe(self) -> bool:
        return not any(self.verdicts.values())

    @property
    def exit_code(self) -> int:
        if not self.safe:
            return EXIT_SAFETY
        if self.scenario.expect_progress and self.progress:
            return EXIT_PROGRESS
        return EXIT_OK


def _measure_node(s: Scenario, leader: int) -> int:
    if s.learner_only:
        return s.learner_only[0]
    return next(a for a in s.acceptors if a != leader)


def summarize(s: Scenario, cluster: Cluster, trace: List[dict], verdicts, progress,
              run_id: str = "run") -> dict:
    loads = aggregate(trace, sorted(cluster.nodes))
    b_node, b_msgs, b_bytes = busiest_node(loads)
    leader = cluster.view.leader
    ld = loads[leader]
    decided = {r["instance"] for r in trace if r["ev"] == "decide"}
    first_leader = min(s.acceptors)
    first_req = next((r for r in trace if r["ev"] == "submit"), None)
    return {
        "run_id": run_id,
        "seed": s.seed,
        "n": s.n,
        "m": majority(s.n),
        "requests": s.requests.count,
        "payload_bytes": s.requests.payload_bytes,
        "learned": len(decided),
        "instances": max(decided, default=0),
        "busiest_node": b_node,
        "busiest_messages": b_msgs,
        "busiest_bytes": b_bytes,
        "leader": leader,
        "leader_messages": ld.messages,
        "leader_bytes": ld.bytes,
        "leader_ordering_bytes": ld.breakdown()["ordering_bytes"],
        "latency_hops": measure_commit_hops(trace, 1, _measure_node(s, first_leader)),
        "response_hops": None if first_req is None else
        measure_response_hops(trace, first_req["request"], first_req["node"]),
        "view_changes": cluster.view_changes,
        "elections": cluster.elections,
        "dyn_steps": cluster.dyn_steps,
        "safety": {k: len(v) for k, v in verdicts.items()},
        "progress_failures": len(progress),
    }


def simulate(s: Scenario, run_id: str = "run") -> RunResult:
    cluster = Cluster(s)
    trace = cluster.run()
    verdicts = check_trace(trace)
    progress = check_progress(trace, s.learner_sites)
    summary = summarize(s, cluster, trace, verdicts, progress, run_id)
    loads = aggregate(trace, sorted(cluster.nodes))
    node_csv = write_csv(node_rows(run_id, loads), NODE_COLUMNS)
    return RunResult(s, trace, cluster, verdicts, progress, summary, node_csv)


def _atomic_write(path: str, text: str):
    d = os.path.dirname(path) or "."
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def run_scenario(s: Scenario, out_dir: Optional[str] = None, run_id: str = "run") -> RunResult:
    """Run one scenario; with ``out_dir`` write ``<run_id>.trace.jsonl``,
    ``<run_id>.nodes.csv`` and ``<run_id>.summary.csv``."""
    res = simulate(s, run_id)
    res.trace_text = dump_trace(res.trace)
    if out_dir is not None:
        _atomic_write(os.path.join(out_dir, f"{run_id}.trace.jsonl"), res.trace_text)
        _atomic_write(os.path.join(out_dir, f"{run_id}.nodes.csv"), res.node_csv)
        _atomic_write(os.path.join(out_dir, f"{run_id}.summary.csv"),
                      write_csv([res.summary], SUMMARY_COLUMNS))
    return res


SWEEP_AXES = ("requests", "payload", "ring")
SWEEP_COLUMNS = SUMMARY_COLUMNS + ["axis", "x", "classical_messages", "classical_bytes",
                                   "ring_messages", "ring_bytes"]


class SweepAborted(RuntimeError):
    def __init__(self, run_id: str, result: RunResult):
        bad = {k: v[:3] for k, v in result.verdicts.items() if v}
        super().__init__(f"{run_id}: safety violation {bad}")
        self.result = result


def _point(template: Scenario, axis: str, x: int, k: int) -> Scenario:
    s = copy.deepcopy(template)
    s.seed = template.seed * 1000 + k
    if axis == "requests":
        s.requests.count = x
    elif axis == "payload":
        s.requests.payload_bytes = x
    elif axis == "ring":
        # ring size m = floor(n/2)+1, so n = 2m - 1 gives exactly m
        s.n = 2 * x - 1
        s.lans = min(s.lans, s.n)
    return s.validate()


def run_sweep(template: Scenario, axis: str, values: Sequence[int],
              out_dir: Optional[str] = None, emit_plots: bool = False) -> List[dict]:
    if axis not in SWEEP_AXES:
        raise ScenarioError(f"sweep axis must be one of {SWEEP_AXES}")
    if not values:
        raise ScenarioError("sweep axis values must be non-empty")
    rows = []
    for k, x in enumerate(values):
        s = _point(template, axis, x, k)
        run_id = f"{axis}-{x}"
        res = run_scenario(s, out_dir, run_id)
        if not res.safe:
            raise SweepAborted(run_id, res)
        row = dict(res.summary, axis=axis, x=x)
        R, m, B = s.requests.count, majority(s.n), s.requests.payload_bytes
        row["classical_messages"], row["classical_bytes"] = \
            baseline_leader_cost("classical", R, m, B)
        row["ring_messages"], row["ring_bytes"] = baseline_leader_cost("ring", R, m, B)
        rows.append(row)
    if out_dir is not None:
        _atomic_write(os.path.join(out_dir, f"sweep-{axis}.csv"), write_csv(rows, SWEEP_COLUMNS))
        if emit_plots:
            plot_sweep(rows, axis, out_dir)
    return rows


def plot_sweep(rows: List[dict], axis: str, out_dir: str) -> List[str]:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    xs = [r["x"] for r in rows]
    paths = []
    for metric in ("messages", "bytes"):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.plot(xs, [r[f"leader_{metric}"] for r in rows], marker="o", label="HT-Ring leader")
        ax.plot(xs, [r[f"busiest_{metric}"] for r in rows], marker="x", ls=":",
                label="busiest node")
        ax.plot(xs, [r[f"classical_{metric}"] for r in rows], ls="--", label="classical")
        ax.plot(xs, [r[f"ring_{metric}"] for r in rows], ls="-.", label="ring")
        ax.set_xlabel(axis)
        ax.set_ylabel(metric)
        ax.legend()
        fig.tight_layout()
        path = os.path.join(out_dir, f"sweep-{axis}-{metric}.svg")
        # fixed metadata keeps the file byte-stable across runs
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
        paths.append(path)
    return paths


_REQUIRED = {
    "send": ("uid", "parent", "node", "msg", "bytes", "to"),
    "deliver": ("uid", "node"), "lost": ("uid", "node"), "dup": ("uid", "node"),
    "drop": ("uid", "node"), "persist": ("node", "rec"),
    "execute": ("node", "instance", "value", "requests"),
    "decide": ("node", "instance", "value"), "submit": ("node", "request"),
    "complete": ("node", "request"), "crash": ("node",), "restart": ("node",),
}


def replay(text: str) -> Dict[str, list]:
    """Re-check a trace's invariants; raises TraceError on malformed input."""
    trace = load_trace(text)
    for r in trace:
        missing = [k for k in _REQUIRED.get(r["ev"], ()) if k not in r]
        if missing:
            raise TraceError(r["_line"], f"{r['ev']} record lacks {', '.join(missing)}")
    return check_trace(trace)
