"""Client-side proposer: submit, retry on timeout, stop at ID_REPLY."""
from __future__ import annotations

import random
from typing import Dict, Optional

from ..core import Kind, Message, Request, RequestId, Unicast
from ..membership import LanAssignment, RingView
from .actions import CancelTimer, Completed, Send, SetTimer

TARGET_POLICIES = ("leader", "random-broadcaster", "random-coordinator", "specific")


class Proposer:
    def __init__(self, node: int, client_id: int, *, policy: str = "random-coordinator",
                 target: Optional[int] = None, timeout: int = 150,
                 rng: Optional[random.Random] = None):
        if policy not in TARGET_POLICIES:
            raise ValueError(f"unknown target policy {policy!r}")
        self.node = node
        self.client_id = client_id
        self.policy = policy
        self.target = target
        self.timeout = timeout
        self.rng = rng or random.Random(node)
        self.view: Optional[RingView] = None
        self.lans: Optional[LanAssignment] = None
        self.outstanding: Dict[RequestId, Request] = {}

    def install_view(self, view, lans, elected=False, now=0):
        self.view, self.lans = view, lans
        return []

    def _first_target(self) -> int:
        if self.policy == "leader":
            return self.view.leader
        if self.policy == "random-broadcaster":
            return self.rng.choice(self.lans.broadcasters)
        if self.policy == "specific":
            return self.target
        return self.rng.choice(self.view.acceptors)

    def _send(self, target: int, r: Request) -> Send:
        return Send(target, Message(Kind.REQUEST, self.node, Unicast(target), payload=r))

    def proposer_submit(self, r: Request, now: int = 0) -> list:
        self.outstanding[r.id] = r
        return [self._send(self._first_target(), r), SetTimer(("retry", r.id), self.timeout)]

    def deliver(self, msg: Message, now: int = 0) -> list:
        if msg.kind is not Kind.ID_REPLY or msg.value not in self.outstanding:
            return []
        del self.outstanding[msg.value]
        return [CancelTimer(("retry", msg.value)), Completed(msg.value)]

    def timer(self, key, now: int = 0) -> list:
        rid = key[1]
        r = self.outstanding.get(rid)
        if r is None:
            return []
        target = self.rng.choice(self.view.acceptors)
        return [self._send(target, r), SetTimer(("retry", rid), self.timeout)]

    def startup(self, records, view, lans, now=0):
        # clients are not crashed by the harness; restarting just forgets retries
        self.view, self.lans = view, lans
        self.outstanding.clear()
        return []
