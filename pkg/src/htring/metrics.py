"""Per-node message/byte accounting and analytic leader-cost baselines.

A multicast is charged once at the sender's egress and once per subscriber
ingress. Bytes use ``encoded_size`` (flat 128-byte overhead plus payload).

Baseline leader costs for ``R`` requests, ring/majority size ``m`` and
request payload ``B`` bytes (no batching, overhead ``h = 128``):

classical
    per request the leader receives the client request (h + B) and replies
    (h); per decision it sends Phase 2a carrying the full value to ``m``
    acceptors (m * (h + B)) and receives ``m`` Phase 2b (m * h).
    messages = R * (2 + 2m); bytes = R * ((h + B) + h + m * (h + B) + m * h)

ring
    per request the leader receives the client request (h + B), multicasts
    it to acceptors and learners (h + B), sends one ring Phase 2a (h),
    receives one Phase 2b (h), multicasts LEARNED (h) and replies (h).
    messages = 6R; bytes = R * (2 * (h + B) + 4h)
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Tuple

from .core import ORDERING_KINDS, OVERHEAD_BYTES

_ORDERING = {k.value for k in ORDERING_KINDS}


@dataclass
class NodeLoad:
    node: int
    msgs_in: int = 0
    msgs_out: int = 0
    bytes_in: int = 0
    bytes_out: int = 0
    # kind -> [in, out, bytes_in, bytes_out]
    kinds: Dict[str, List[int]] = field(default_factory=dict)

    @property
    def messages(self) -> int:
        return self.msgs_in + self.msgs_out

    @property
    def bytes(self) -> int:
        return self.bytes_in + self.bytes_out

    def _k(self, kind):
        return self.kinds.setdefault(kind, [0, 0, 0, 0])

    def breakdown(self) -> Dict[str, int]:
        """Bytes split into ordering traffic and everything else
        (request dissemination, payload fetches, client traffic)."""
        ordering = sum(v[2] + v[3] for k, v in self.kinds.items() if k in _ORDERING)
        return {"ordering_bytes": ordering, "dissemination_bytes": self.bytes - ordering,
                "ordering_messages": sum(v[0] + v[1] for k, v in self.kinds.items()
                                         if k in _ORDERING)}


def aggregate(trace: Iterable[dict], nodes: Iterable[int] = ()) -> Dict[int, NodeLoad]:
    loads: Dict[int, NodeLoad] = {n: NodeLoad(n) for n in nodes}
    sends = {}
    for r in trace:
        ev = r["ev"]
        if ev == "send":
            sends[r["uid"]] = r
            ld = loads.setdefault(r["node"], NodeLoad(r["node"]))
            ld.msgs_out += 1
            ld.bytes_out += r["bytes"]
            k = ld._k(r["msg"]["kind"])
            k[1] += 1
            k[3] += r["bytes"]
        elif ev == "deliver":
            s = sends[r["uid"]]
            ld = loads.setdefault(r["node"], NodeLoad(r["node"]))
            ld.msgs_in += 1
            ld.bytes_in += s["bytes"]
            k = ld._k(s["msg"]["kind"])
            k[0] += 1
            k[2] += s["bytes"]
    return dict(sorted(loads.items()))


def busiest_node(loads: Mapping[int, NodeLoad]) -> Tuple[int, int, int]:
    if not loads:
        raise ValueError("no loads")
    best = min(loads.values(), key=lambda ld: (-ld.messages, -ld.bytes, ld.node))
    return best.node, best.messages, best.bytes


def baseline_leader_cost(variant: str, R: int, m: int, B: int,
                         overhead: int = OVERHEAD_BYTES) -> Tuple[int, int]:
    if R < 0:
        raise ValueError("R must be >= 0")
    h = overhead
    if variant == "classical":
        return R * (2 + 2 * m), R * ((h + B) + h + m * (h + B) + m * h)
    if variant == "ring":
        return 6 * R, R * (2 * (h + B) + 4 * h)
    raise ValueError(f"unknown baseline variant {variant!r}")


NODE_COLUMNS = ["run_id", "node", "msgs_in", "msgs_out", "bytes_in", "bytes_out",
                "ordering_bytes", "dissemination_bytes"]
SUMMARY_COLUMNS = ["run_id", "busiest_node", "busiest_messages", "busiest_bytes",
                   "leader", "leader_messages", "leader_bytes", "leader_ordering_bytes",
                   "latency_hops", "response_hops", "learned"]


def node_rows(run_id: str, loads: Mapping[int, NodeLoad]) -> List[dict]:
    rows = []
    for n, ld in loads.items():
        b = ld.breakdown()
        rows.append({"run_id": run_id, "node": n, "msgs_in": ld.msgs_in,
                     "msgs_out": ld.msgs_out, "bytes_in": ld.bytes_in,
                     "bytes_out": ld.bytes_out, "ordering_bytes": b["ordering_bytes"],
                     "dissemination_bytes": b["dissemination_bytes"]})
    return rows


def write_csv(rows: List[dict], columns: List[str]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({c: ("" if r.get(c) is None else r.get(c)) for c in columns})
    return buf.getvalue()
