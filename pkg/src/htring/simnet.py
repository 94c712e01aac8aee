"""Seeded discrete-event network for sites, proposers and their stable stores.

Events fire in ``(tick, seq)`` order. Every wire message gets a uid and the
uid of the delivery that caused it (``parent``), so a commit's causal hop
chain can be rebuilt from the trace alone.

Trace records are plain dicts with a fixed key order, one JSON object per
line on disk:

    {"t", "ev": "send",    "uid", "parent", "node", "msg", "bytes", "to", "payload"}
    {"t", "ev": "deliver", "uid", "node"}
    {"t", "ev": "lost" | "dup" | "drop", "uid", "node"}
    {"t", "ev": "persist", "node", "rec"}
    {"t", "ev": "execute", "node", "instance", "value", "requests"}
    {"t", "ev": "decide",  "node", "instance", "value"}
    {"t", "ev": "submit" | "complete", "node", "request"}
    {"t", "ev": "crash" | "restart", "node"}
    {"t", "ev": "view",    "view", "leader", "lsn", "I", "ring", "broadcasters", "elected"}
    {"t", "ev": "notify",  "node", "what", "detail"}
    {"t", "ev": "end",     "drained"}            (appended by the harness)

``payload`` on a send is null or ``{"id", "members"}`` with request ids.
"""
from __future__ import annotations

import heapq
import json
import random
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional

from .core import Batch, Kind, Message, Multicast, Request, encoded_size, value_str
from .protocol.actions import (CancelTimer, Completed, Decide, Execute, Mcast, Notify,
                               Persist, Send, SetTimer)
from .storage import MemoryStore, record_to_dict


@dataclass
class FaultProfile:
    loss: float = 0.0
    dup: float = 0.0
    min_delay: int = 1
    max_delay: int = 1
    reorder: bool = False
    lan_busy_ticks: int = 0   # per-LAN serialization penalty; 0 disables it

    def __post_init__(self):
        for name in ("loss", "dup"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {p}")
        if self.min_delay < 1:
            raise ValueError("min_delay must be >= 1 tick")
        if self.max_delay < self.min_delay:
            raise ValueError("max_delay must be >= min_delay")

    @property
    def lossless(self) -> bool:
        return self.loss == 0 and self.dup == 0


class Controller:
    """Membership hooks the simulator calls; the default does nothing."""

    def on_notify(self, sim, node, action):
        pass

    def on_crash(self, sim, node):
        pass

    def on_detect(self, sim, node):
        pass

    def before_restart(self, sim, node):
        pass

    def current_view(self):
        return None, None


class Simulator:
    def __init__(self, nodes: Dict[int, object], subscribers: Iterable[int],
                 profile: Optional[FaultProfile] = None, seed: int = 0,
                 controller: Optional[Controller] = None,
                 stores: Optional[Dict[int, MemoryStore]] = None):
        self.nodes = nodes
        self.subscribers = sorted(subscribers)
        self.profile = profile or FaultProfile()
        self.rng = random.Random(f"net/{seed}")
        self.controller = controller or Controller()
        self.stores = stores if stores is not None else {n: MemoryStore(n) for n in nodes}
        self.alive = {n: True for n in nodes}
        self.now = 0
        self.trace: List[dict] = []
        self.events_processed = 0
        self.crash_point = None
        self._q: list = []
        self._seq = 0
        self._uid = 0
        self._timers: Dict[tuple, int] = {}
        self._fifo: Dict[tuple, int] = {}
        self._lan_free: Dict[int, int] = {}
        self.sends: Dict[int, dict] = {}

    # -- scheduling -------------------------------------------------------

    def _push(self, tick: int, kind: str, data):
        self._seq += 1
        heapq.heappush(self._q, (tick, self._seq, kind, data))

    def submit(self, tick: int, client: int, request: Request):
        self._push(tick, "submit", (client, request))

    def crash(self, tick: int, node: int):
        self._push(tick, "crash", node)

    def restart(self, tick: int, node: int):
        self._push(tick, "restart", node)

    def detect(self, tick: int, node: int):
        self._push(tick, "detect", node)

    def call(self, tick: int, fn: Callable):
        self._push(tick, "call", fn)

    def _record(self, rec: dict):
        self.trace.append(rec)

    # -- running ----------------------------------------------------------

    def pending(self) -> bool:
        return bool(self._q)

    def run(self, until: Optional[int] = None, stop: Optional[Callable[[], bool]] = None):
        while self._q:
            if until is not None and self._q[0][0] > until:
                break
            self.step()
            if stop is not None and stop():
                break

    def step(self):
        tick, _, kind, data = heapq.heappop(self._q)
        self.now = tick
        self.events_processed += 1
        k = self.events_processed
        if kind == "deliver":
            uid, target, msg = data
            if not self.alive[target]:
                self._record({"t": tick, "ev": "drop", "uid": uid, "node": target})
            else:
                self._record({"t": tick, "ev": "deliver", "uid": uid, "node": target})
                self._apply(target, self.nodes[target].deliver(msg, tick), uid, k)
        elif kind == "timer":
            node, key, gen = data
            if self.alive[node] and self._timers.get((node, key)) == gen:
                del self._timers[(node, key)]
                self._apply(node, self.nodes[node].timer(key, tick), None, k)
        elif kind == "submit":
            client, request = data
            self._record({"t": tick, "ev": "submit", "node": client,
                          "request": str(request.id)})
            self._apply(client, self.nodes[client].proposer_submit(request, tick), None, k)
        elif kind == "crash":
            self._do_crash(data)
        elif kind == "restart":
            self._do_restart(data)
        elif kind == "detect":
            self.controller.on_detect(self, data)
        elif kind == "call":
            data(self)
        cp = self.crash_point
        if cp is not None and cp[0] == k and self.alive.get(cp[1]):
            self._do_crash(cp[1])

    def _do_crash(self, node: int):
        if not self.alive[node]:
            return
        self.alive[node] = False
        for key in [k for k in self._timers if k[0] == node]:
            del self._timers[key]
        self._record({"t": self.now, "ev": "crash", "node": node})
        self.controller.on_crash(self, node)

    def _do_restart(self, node: int):
        if self.alive[node]:
            return
        self.alive[node] = True
        self._record({"t": self.now, "ev": "restart", "node": node})
        self.controller.before_restart(self, node)
        view, lans = self.controller.current_view()
        records = self.stores[node].recover()
        self._apply(node, self.nodes[node].startup(records, view, lans, self.now), None, None)

    def install_view(self, view, lans, elected: bool):
        self._record({"t": self.now, "ev": "view", "view": view.view, "leader": view.leader,
                      "lsn": str(view.lsn), "I": view.I, "ring": list(view.ring),
                      "broadcasters": list(lans.broadcasters), "elected": elected})
        for n in sorted(self.nodes):
            if self.alive[n]:
                self._apply(n, self.nodes[n].install_view(view, lans, elected, self.now),
                            None, None)

    def persist_direct(self, node: int, record):
        """Write performed by the membership layer rather than a role handler."""
        self.stores[node].persist(record)
        self._record({"t": self.now, "ev": "persist", "node": node,
                      "rec": record_to_dict(record, compact=True)})

    # -- actions ----------------------------------------------------------

    def _apply(self, node: int, actions, parent: Optional[int], k: Optional[int]):
        cp = self.crash_point
        mid = cp is not None and cp[0] == k and cp[1] == node and cp[2]
        for a in actions:
            if not self.alive[node]:
                return
            t = type(a)
            if t is Send:
                self._emit(node, a.msg, [a.target], parent)
            elif t is Mcast:
                self._emit(node, a.msg, [s for s in self.subscribers if s != node], parent)
            elif t is Persist:
                self.persist_direct(node, a.record)
                if mid:
                    self._do_crash(node)
                    return
            elif t is SetTimer:
                self._seq += 1
                gen = self._seq
                self._timers[(node, a.key)] = gen
                heapq.heappush(self._q, (self.now + a.delay, gen, "timer", (node, a.key, gen)))
            elif t is CancelTimer:
                self._timers.pop((node, a.key), None)
            elif t is Execute:
                self._record({"t": self.now, "ev": "execute", "node": node,
                              "instance": a.instance, "value": value_str(a.value),
                              "requests": [str(r) for r in a.requests]})
            elif t is Decide:
                self._record({"t": self.now, "ev": "decide", "node": node,
                              "instance": a.instance, "value": value_str(a.value)})
            elif t is Completed:
                self._record({"t": self.now, "ev": "complete", "node": node,
                              "request": str(a.request)})
            elif t is Notify:
                self._record({"t": self.now, "ev": "notify", "node": node, "what": a.what,
                              "detail": list(a.detail or ())})
                self.controller.on_notify(self, node, a)

    def _emit(self, node: int, msg: Message, targets: List[int], parent: Optional[int]):
        self._uid += 1
        uid = self._uid
        rec = {"t": self.now, "ev": "send", "uid": uid, "parent": parent, "node": node,
               "msg": msg.canonical(), "bytes": encoded_size(msg), "to": targets,
               "payload": _payload_info(msg.payload)}
        self._record(rec)
        self.sends[uid] = rec
        depart = self.now
        if isinstance(msg.transport, Multicast) and self.profile.lan_busy_ticks:
            lan = msg.transport.lan
            depart = max(depart, self._lan_free.get(lan, 0))
            self._lan_free[lan] = depart + self.profile.lan_busy_ticks
        p = self.profile
        for target in targets:
            if p.loss and self.rng.random() < p.loss:
                self._record({"t": self.now, "ev": "lost", "uid": uid, "node": target})
                continue
            copies = 1
            if p.dup and self.rng.random() < p.dup:
                copies = 2
                self._record({"t": self.now, "ev": "dup", "uid": uid, "node": target})
            for _ in range(copies):
                delay = p.min_delay if p.min_delay == p.max_delay else \
                    self.rng.randint(p.min_delay, p.max_delay)
                at = depart + delay
                if not p.reorder:
                    link = (node, target)
                    at = max(at, self._fifo.get(link, 0))
                    self._fifo[link] = at
                self._push(at, "deliver", (uid, target, msg))


def _payload_info(p) -> Optional[dict]:
    # ids only; enough for offline checks to know which batches were formed
    if p is None:
        return None
    if isinstance(p, Batch):
        return {"id": str(p.id), "members": [str(r) for r in p.member_ids]}
    return {"id": str(p.id), "members": [str(p.id)]}


def dump_trace(trace: List[dict]) -> str:
    return "".join(json.dumps(r, separators=(",", ":")) + "\n" for r in trace)


def load_trace(text: str) -> List[dict]:
    out = []
    for n, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as e:
            raise TraceError(n, f"not JSON: {e.msg}") from None
        if not isinstance(rec, dict) or "ev" not in rec or "t" not in rec:
            raise TraceError(n, "record lacks 't'/'ev'")
        rec["_line"] = n
        out.append(rec)
    return out


class TraceError(ValueError):
    def __init__(self, line: int, why: str):
        super().__init__(f"trace line {line}: {why}")
        self.line = line


def _chain_length(sends: Dict[int, dict], uid: int) -> int:
    n = 0
    while uid is not None:
        n += 1
        uid = sends[uid]["parent"]
    return n


def _sends_of(trace: List[dict]) -> Dict[int, dict]:
    return {r["uid"]: r for r in trace if r["ev"] == "send"}


def measure_commit_hops(trace: List[dict], instance: int, node: int) -> Optional[int]:
    """Causal wire-hop count from client REQUEST to the first LEARNED for
    ``instance`` delivered at ``node``; None if it never arrived."""
    sends = _sends_of(trace)
    for r in trace:
        if r["ev"] != "deliver" or r["node"] != node:
            continue
        m = sends[r["uid"]]["msg"]
        if m["kind"] == Kind.LEARNED.value and m["instance"] == instance:
            return _chain_length(sends, r["uid"])
    return None


def measure_response_hops(trace: List[dict], request: str, client: int) -> Optional[int]:
    """Causal hop count from submission to the ID_REPLY delivered at ``client``."""
    sends = _sends_of(trace)
    for r in trace:
        if r["ev"] != "deliver" or r["node"] != client:
            continue
        m = sends[r["uid"]]["msg"]
        if m["kind"] == Kind.ID_REPLY.value and m["value"] == request:
            return _chain_length(sends, r["uid"])
    return None
