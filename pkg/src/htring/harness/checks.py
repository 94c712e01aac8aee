"""Offline invariant checks over a trace; no re-simulation.

Every check returns a list of ``(index, detail)`` pairs where ``index`` is
the record's position in the trace (its file line when the trace was
loaded from disk).
"""
from __future__ import annotations

from collections import defaultdict
from typing import Dict, Iterable, List, Optional, Tuple

from ..core import OVERHEAD_BYTES

SAFETY_CHECKS = ("nontriviality", "consistency", "in_order", "at_most_once",
                 "persist_before_send", "hop_accounting", "conservation",
                 "crashed_silence")

Violation = Tuple[int, str]


def _idx(trace, k):
    return trace[k].get("_line", k)


def check_nontriviality(trace) -> List[Violation]:
    proposed = set()
    submitted = set()
    out = []
    for k, r in enumerate(trace):
        ev = r["ev"]
        if ev == "submit":
            proposed.add(r["request"])
            submitted.add(r["request"])
        elif ev == "send" and r.get("payload"):
            # a batch id becomes proposable once some broadcaster formed it
            p = r["payload"]
            if p["id"].startswith("b:") and all(m in submitted for m in p["members"]):
                proposed.add(p["id"])
        elif ev in ("decide", "execute") or (ev == "send" and r["msg"]["kind"] == "LEARNED"):
            v = r["value"] if ev != "send" else r["msg"]["value"]
            if v is not None and v not in proposed:
                out.append((_idx(trace, k), f"learned value {v} was never proposed"))
            if ev == "execute":
                for q in r["requests"]:
                    if q not in submitted:
                        out.append((_idx(trace, k), f"executed {q} never submitted"))
    return out


def check_consistency(trace) -> List[Violation]:
    chosen: Dict[int, Optional[str]] = {}
    out = []
    for k, r in enumerate(trace):
        ev = r["ev"]
        if ev in ("decide", "execute"):
            i, v = r["instance"], r["value"]
        elif ev == "send" and r["msg"]["kind"] == "LEARNED":
            i, v = r["msg"]["instance"], r["msg"]["value"]
        else:
            continue
        if i in chosen and chosen[i] != v:
            out.append((_idx(trace, k), f"instance {i}: {v} conflicts with {chosen[i]}"))
        chosen.setdefault(i, v)
    return out


def _incarnations(trace):
    """Yields (k, record, incarnation key) with the key bumped on restart."""
    inc = defaultdict(int)
    for k, r in enumerate(trace):
        if r["ev"] == "restart":
            inc[r["node"]] += 1
        yield k, r, (r.get("node"), inc[r.get("node")])


def check_in_order(trace) -> List[Violation]:
    last = defaultdict(int)
    out = []
    for k, r, key in _incarnations(trace):
        if r["ev"] != "execute":
            continue
        if r["instance"] != last[key] + 1:
            out.append((_idx(trace, k), f"node {r['node']} executed instance "
                                         f"{r['instance']} after {last[key]}"))
        last[key] = max(last[key], r["instance"])
    return out


def check_at_most_once(trace) -> List[Violation]:
    seen = defaultdict(set)
    out = []
    for k, r, key in _incarnations(trace):
        if r["ev"] != "execute":
            continue
        for q in r["requests"]:
            if q in seen[key]:
                out.append((_idx(trace, k), f"node {r['node']} executed {q} twice"))
            seen[key].add(q)
    return out


def check_persist_before_send(trace) -> List[Violation]:
    coord = set()       # (node, i, crnd, cval)
    acc = set()         # (node, i, vrnd, vval)
    out = []
    for k, r in enumerate(trace):
        ev = r["ev"]
        if ev == "persist":
            rec, f = r["rec"], r["rec"]["fields"]
            if rec["kind"] == "coordinator_instance":
                coord.add((r["node"], rec["instance"], f["crnd"], f["cval"]))
            elif rec["kind"] == "acceptor_instance":
                acc.add((r["node"], rec["instance"], f["vrnd"], f["vval"]))
        elif ev == "send":
            m = r["msg"]
            key = (r["node"], m["instance"], m["round"], m["value"])
            if m["kind"] == "PHASE2A" and key not in coord:
                out.append((_idx(trace, k), f"PHASE2A {key} before its coordinator write"))
            elif m["kind"] in ("PHASE2A2B", "PHASE2B") and key not in acc:
                out.append((_idx(trace, k), f"{m['kind']} {key} before its acceptor write"))
    return out


def check_hop_accounting(trace) -> List[Violation]:
    delivered = set()   # (uid, node)
    out = []
    for k, r in enumerate(trace):
        ev = r["ev"]
        if ev == "deliver":
            delivered.add((r["uid"], r["node"]))
        elif ev == "send":
            if r["parent"] is not None and (r["parent"], r["node"]) not in delivered:
                out.append((_idx(trace, k), f"send {r['uid']} names parent {r['parent']} "
                                             f"never delivered at {r['node']}"))
            if r["bytes"] != OVERHEAD_BYTES + r["msg"]["payload_size"]:
                out.append((_idx(trace, k), f"send {r['uid']} byte size mismatch"))
    return out


def check_conservation(trace) -> List[Violation]:
    targets = {}
    outcome = defaultdict(lambda: [0, 0, 0])   # lost, dup, landed
    drained = any(r["ev"] == "end" and r.get("drained") for r in trace)
    first = {}
    out = []
    for k, r in enumerate(trace):
        ev = r["ev"]
        if ev == "send":
            targets[r["uid"]] = r["to"]
            first[r["uid"]] = k
        elif ev in ("lost", "dup", "deliver", "drop"):
            key = (r["uid"], r["node"])
            if r["uid"] not in targets or r["node"] not in targets[r["uid"]]:
                out.append((_idx(trace, k), f"{ev} of unsent message {key}"))
                continue
            slot = {"lost": 0, "dup": 1}.get(ev, 2)
            outcome[key][slot] += 1
    for uid, to in targets.items():
        for t in to:
            lost, dup, landed = outcome[(uid, t)]
            want = 0 if lost else 1 + dup
            bad = landed > want or lost > 1 or (lost and dup)
            if drained and landed != want:
                bad = True
            if bad:
                out.append((_idx(trace, first[uid]),
                            f"message {uid} to {t}: lost={lost} dup={dup} landed={landed}"))
    return out


def check_crashed_silence(trace) -> List[Violation]:
    down = set()
    out = []
    for k, r in enumerate(trace):
        ev = r["ev"]
        if ev == "crash":
            down.add(r["node"])
        elif ev == "restart":
            down.discard(r["node"])
        elif ev in ("deliver", "send", "execute", "persist", "decide") and r["node"] in down:
            out.append((_idx(trace, k), f"{ev} at crashed node {r['node']}"))
    return out


_CHECKS = {
    "nontriviality": check_nontriviality,
    "consistency": check_consistency,
    "in_order": check_in_order,
    "at_most_once": check_at_most_once,
    "persist_before_send": check_persist_before_send,
    "hop_accounting": check_hop_accounting,
    "conservation": check_conservation,
    "crashed_silence": check_crashed_silence,
}


def check_trace(trace: List[dict]) -> Dict[str, List[Violation]]:
    return {name: _CHECKS[name](trace) for name in SAFETY_CHECKS}


def check_progress(trace: List[dict], learners: Iterable[int]) -> List[str]:
    """Requests submitted but not completed at their client, or not executed
    at some learner that is alive at the end (in its latest incarnation)."""
    submitted, completed = {}, set()
    executed = defaultdict(set)
    alive = {n: True for n in learners}
    for r in trace:
        ev = r["ev"]
        if ev == "submit":
            submitted[r["request"]] = r["node"]
        elif ev == "complete":
            completed.add(r["request"])
        elif ev == "crash" and r["node"] in alive:
            alive[r["node"]] = False
        elif ev == "restart" and r["node"] in alive:
            alive[r["node"]] = True
            executed[r["node"]] = set()
        elif ev == "execute":
            executed[r["node"]].update(r["requests"])
    out = [f"{q} never answered at client {c}" for q, c in submitted.items()
           if q not in completed]
    for n, up in sorted(alive.items()):
        if up:
            missing = [q for q in submitted if q not in executed[n]]
            if missing:
                out.append(f"learner {n} did not execute {len(missing)} request(s), "
                           f"first {missing[0]}")
    return out
