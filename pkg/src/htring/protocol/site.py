"""State machine for one computing site: acceptor + coordinator and/or learner.

A site consumes one input at a time (a delivered message, a fired timer, a
startup, or a view installation) and returns the actions to perform.
Messages a site addresses to itself, and its own multicasts, are handed to
its co-located roles directly and never touch the network.
"""
from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Union

from ..core import (Batch, BatchId, Kind, Message, Multicast, Request, RequestId, Round,
                    Unicast, Value)
from ..membership import DynamicRingState, LanAssignment, RingView
from ..storage import (ACCEPTOR, COORDINATOR, ELECTION, PAYLOAD, AcceptorRecord,
                       CoordinatorRecord, PayloadRecord)
from .actions import (CancelTimer, Decide, Execute, Mcast, Notify, Persist, Send,
                      SetTimer)
from .instance import AcceptorInstance, accept_local, choose_value, phase1a, phase2


@dataclass
class ProtocolConfig:
    delta: int = 10                 # learner payload/gap re-query period
    timeout: int = 50               # leader resend period
    batching: bool = False
    max_batch_size: int = 8
    max_batch_delay: int = 5
    pipeline_depth: int = 16
    dynamic_ring: bool = False
    ack_timeout: int = 6
    retransmit_cap: int = 20
    client_timeout: int = 150
    forward_policy: str = "random"  # random | leader | non_leader
    tail_beacons: int = 10
    gap_window: int = 32
    catchup_probes: int = 10        # idle probes a restarted learner sends before giving up


@dataclass
class CoordinatorInstance:
    instance: int
    crnd: Optional[Round] = None
    cval: Value = None
    state: str = "p1"               # p1 | p2 | closed
    replies: Dict[int, tuple] = field(default_factory=dict)
    retries: int = 0
    last_relearn: int = -(10 ** 9)
    fresh: bool = True


Payload = Union[Request, Batch]


class Site:
    def __init__(self, node: int, *, acceptor: bool = True, learner: bool = True,
                 sites=(), config: Optional[ProtocolConfig] = None,
                 rng: Optional[random.Random] = None):
        self.node = node
        self.has_acceptor = acceptor
        self.has_learner = learner
        self.sites = frozenset(sites) | {node}
        self.cfg = config or ProtocolConfig()
        self.rng = rng or random.Random(node)
        self.view: Optional[RingView] = None
        self.lans: Optional[LanAssignment] = None
        self._reset_volatile()

    # -- volatile state ---------------------------------------------------

    def _reset_volatile(self):
        # election variables (reloaded from storage on startup)
        self.leader = False
        self.I = 0
        self.lsn: Optional[Round] = None
        # payloads seen at this site, FIFO by arrival
        self.req_set: Dict[Value, Payload] = {}
        self.req_index: Dict[RequestId, Request] = {}
        self.durable = set()        # values whose payload is on stable storage
        self.origin: Dict[RequestId, int] = {}
        # coordinator
        self.learned_set: Dict[int, Value] = {}
        self.learned_vals: Dict[Value, int] = {}
        self.learned_reqs = set()
        self.proposed = set()
        self.cinst: Dict[int, CoordinatorInstance] = {}
        self.open: Dict[int, None] = {}
        self.next_instance = 0
        self.beacons_left = 0
        self.beacon_armed = False
        # acceptor
        self.ainst: Dict[int, AcceptorInstance] = {}
        self.dyn = DynamicRingState()
        self.pending_ack: Dict[tuple, tuple] = {}
        # broadcaster batching
        self.open_batch: List[Request] = []
        self.batched: Dict[RequestId, BatchId] = {}
        self.batches: Dict[BatchId, Batch] = {}
        self.batch_seq = 0
        # learner
        self.learned: Dict[int, Value] = {}
        self.executed_upto = 0
        self.executed = set()
        self.max_seen = 0
        self.pending_fetch: Dict[Value, None] = {}
        # Phase 2 work parked until the value's payload is held locally
        self.await_accept: Dict[Value, List[Message]] = {}
        self.await_propose: Dict[Value, List[int]] = {}
        self.gap_armed = False
        self.catchup_idle = 0
        self.catchup_mark = 0
        self._acts: list = []
        self._local: deque = deque()

    # -- small helpers ----------------------------------------------------

    @property
    def broadcaster(self) -> bool:
        return self.lans is not None and self.lans.is_broadcaster(self.node)

    @property
    def quorum(self) -> int:
        return self.view.size

    def _msg(self, kind, target=None, lan=None, **kw) -> Message:
        transport = Unicast(target) if lan is None else Multicast(lan)
        return Message(kind, self.node, transport, **kw)

    def _send(self, target: int, kind: Kind, **kw):
        msg = self._msg(kind, target=target, **kw)
        if target == self.node:
            self._local.append(msg)
        else:
            self._acts.append(Send(target, msg))

    def _mcast(self, kind: Kind, **kw):
        lans = sorted(self.lans.lans_of.get(self.node, ())) if self.lans else []
        # leader multicasts LEARNED even after losing broadcaster duty
        lan = self.rng.choice(lans) if lans else 0
        msg = self._msg(kind, lan=lan, **kw)
        self._acts.append(Mcast(msg))
        self._local.append(msg)

    def _emit(self, action):
        self._acts.append(action)

    def _flush(self) -> list:
        while self._local:
            self._dispatch(self._local.popleft(), local=True)
        acts, self._acts = self._acts, []
        return acts

    def _random_coordinator(self) -> int:
        others = [a for a in self.view.acceptors if a != self.node]
        return self.rng.choice(others or list(self.view.acceptors))

    # -- driver entry points ----------------------------------------------

    def deliver(self, msg: Message, now: int = 0) -> list:
        self.now = now
        self._dispatch(msg, local=False)
        return self._flush()

    def timer(self, key, now: int = 0) -> list:
        self.now = now
        kind = key[0]
        if kind == "retx":
            self._on_retransmit(key[1])
        elif kind == "beacon":
            self._on_beacon()
        elif kind == "batch":
            self.batch_flush()
        elif kind == "fetch":
            self._on_fetch_timer(key[1])
        elif kind == "gap":
            self._on_gap_timer()
        elif kind == "ack":
            self._on_ack_timeout(key[1])
        elif kind == "catchup":
            self._on_catchup_timer()
        return self._flush()

    def startup(self, records, view: RingView, lans: LanAssignment, now: int = 0) -> list:
        """Restart from stable storage; every volatile field starts empty."""
        self.now = now
        self._reset_volatile()
        # batch ids must not repeat across incarnations; restart ticks only grow
        self.batch_seq = now << 20
        self.view, self.lans = view, lans
        coord = {}
        for rec in records:
            if rec.kind == ELECTION:
                self.leader, self.I, self.lsn = rec.leader, rec.I, rec.lsn
            elif rec.kind == ACCEPTOR:
                self.ainst[rec.instance] = AcceptorInstance(
                    rec.instance, rec.rnd, rec.vrnd, rec.vval, rec.sn)
            elif rec.kind == COORDINATOR:
                coord[rec.instance] = rec
            elif rec.kind == PAYLOAD:
                self._restore(rec.payload)
        if self.has_acceptor:
            self.coordinator_on_startup(coord)
            self.acceptor_on_startup()
        if self.has_learner:
            self._catchup_probe()
        return self._flush()

    def install_view(self, view: RingView, lans: LanAssignment, elected: bool,
                     now: int = 0) -> list:
        """Adopt a new ring/LAN snapshot; ``elected`` means a new lsn was chosen."""
        self.now = now
        old = self.view
        self.view, self.lans = view, lans
        if not self.has_acceptor:
            return self._flush()
        if elected:
            self.lsn, self.I = view.lsn, view.I
            self.cinst.clear()
            self.open.clear()
            self.proposed.clear()
            self.await_propose.clear()
            self.leader = view.leader == self.node
            if self.leader:
                self._begin_leadership(view.I, set())
        elif self.leader and old is not None and old.ring != view.ring:
            for i in list(self.open):
                ci = self.cinst[i]
                if ci.state == "p2":
                    self._send_2a(ci)
                elif ci.state == "p1":
                    for a in view.ring:
                        if a not in ci.replies:
                            self._send(a, Kind.PHASE1A, instance=i, round=ci.crnd)
        return self._flush()

    # -- routing ----------------------------------------------------------

    def _dispatch(self, msg: Message, local: bool):
        k = msg.kind
        if k is Kind.REQUEST:
            self._on_request_msg(msg, local)
        elif k is Kind.LEARNED:
            if self.has_acceptor:
                self.acceptor_on_learned(msg.value, msg.instance)
            if self.has_learner:
                self.learner_on_learned(msg.value, msg.instance)
        elif not self.has_acceptor:
            return
        elif k is Kind.PHASE1A:
            self.on_phase1a(msg)
        elif k is Kind.PHASE1B:
            self.on_phase1b(msg)
        elif k in (Kind.PHASE2A, Kind.PHASE2A2B):
            self.on_phase2(msg)
        elif k is Kind.PHASE2B:
            self.coordinator_on_phase2b(msg)
        elif k is Kind.DENIAL:
            self.on_denial()
        elif k is Kind.ID_QUERY:
            self.coordinator_on_id_query(msg)
        elif k is Kind.ACK:
            self._on_ack(msg)

    def _on_request_msg(self, msg: Message, local: bool):
        p = msg.payload
        if msg.value is not None:
            # answer to one of our ID_QUERYs
            self._store(p)
            if self.has_learner:
                self.learner_on_request(p)
            return
        if local:
            if self.has_learner:
                self.learner_on_request(p)
            return
        if isinstance(msg.transport, Multicast):
            source = "multicast"
        elif msg.sender in self.sites:
            source = "peer"
        else:
            source = "proposer"
        if self.has_acceptor:
            self.coordinator_on_request(p, source, msg.sender)
        else:
            self._store(p)
        if self.has_learner:
            self.learner_on_request(p)

    # -- payload store ----------------------------------------------------

    def _store(self, p: Payload) -> bool:
        if p.id in self.req_set:
            return False
        self.req_set[p.id] = p
        if isinstance(p, Batch):
            self.batches[p.id] = p
            for r in p.members:
                self.req_index.setdefault(r.id, r)
            if p.id in self.learned_vals:
                self._mark_learned(p.id)
        else:
            self.req_index[p.id] = p
        if p.id in self.pending_fetch:
            del self.pending_fetch[p.id]
            self._emit(CancelTimer(("fetch", p.id)))
        for msg in self.await_accept.pop(p.id, ()):
            self._local.append(msg)
        for i in self.await_propose.pop(p.id, ()):
            ci = self.cinst.get(i)
            if ci is not None and ci.state == "fetch" and ci.cval == p.id and self.leader:
                self._propose(ci, ci.crnd, ci.cval)
        if self.leader and self.view is not None:
            # covers payloads that arrive through a fetch answer as well
            self.pipeline_open_instances()
        return True

    def _restore(self, p: Payload):
        self.req_set[p.id] = p
        self.durable.add(p.id)
        if isinstance(p, Batch):
            self.batches[p.id] = p
            for r in p.members:
                self.req_index.setdefault(r.id, r)
        else:
            self.req_index[p.id] = p

    def _persist_payload(self, v: Value):
        # written before any record naming v, so whoever accepted or proposed
        # v can still hand out its payload after a restart
        if v is not None and v not in self.durable:
            self.durable.add(v)
            self._emit(Persist(PayloadRecord(self.req_set[v])))

    def _holds(self, v: Value) -> bool:
        return v is None or v in self.req_set

    def _request_ids(self, v: Value):
        if v is None:
            return ()
        if isinstance(v, RequestId):
            return (v,)
        b = self.req_set.get(v)
        return b.member_ids if b is not None else ()

    def _mark_learned(self, v: Value):
        for rid in self._request_ids(v):
            self.learned_reqs.add(rid)
            if not self.has_learner and rid in self.origin:
                self._send(self.origin.pop(rid), Kind.ID_REPLY, value=rid)

    # -- coordinator: requests --------------------------------------------

    def coordinator_on_request(self, p: Payload, source: str, sender: int):
        if isinstance(p, Batch):
            if self._store(p) and self.leader:
                self.pipeline_open_instances()
            return
        r = p
        if source == "proposer":
            if r.id in self.learned_reqs:
                self._send(sender, Kind.ID_REPLY, value=r.id)
                return
            self.origin[r.id] = sender
        new = self._store(r)
        if source == "multicast":
            if self.leader and new:
                self.pipeline_open_instances()
            return
        if self.broadcaster:
            if self.cfg.batching:
                self.batch_accumulate(r)
            else:
                self._mcast(Kind.REQUEST, payload=r)
                if self.leader and new:
                    self.pipeline_open_instances()
        else:
            self._send(self._forward_target(), Kind.REQUEST, payload=r)

    def _forward_target(self) -> int:
        bs = list(self.lans.broadcasters)
        policy = self.cfg.forward_policy
        if policy == "leader" and self.view.leader in bs:
            return self.view.leader
        if policy == "non_leader":
            others = [b for b in bs if b != self.view.leader]
            if others:
                return self.rng.choice(others)
        return self.rng.choice(bs)

    def coordinator_on_id_query(self, msg: Message):
        if msg.value is not None:
            p = self.req_set.get(msg.value)
            if p is not None:
                self._send(msg.sender, Kind.REQUEST, payload=p, value=msg.value)
        elif msg.instance in self.learned_set:
            self._send(msg.sender, Kind.LEARNED, instance=msg.instance,
                       value=self.learned_set[msg.instance])

    # -- broadcaster batching ---------------------------------------------

    def batch_accumulate(self, r: Request):
        bid = self.batched.get(r.id)
        if bid is not None:
            # a retry of something already sealed: disseminate again
            if bid in self.batches and bid not in self.learned_vals:
                self._mcast(Kind.REQUEST, payload=self.batches[bid])
            return
        if r.id in self.learned_reqs or any(x.id == r.id for x in self.open_batch):
            return
        self.open_batch.append(r)
        if len(self.open_batch) >= self.cfg.max_batch_size:
            self.batch_flush()
        elif len(self.open_batch) == 1:
            self._emit(SetTimer(("batch",), self.cfg.max_batch_delay))

    def batch_flush(self) -> Optional[Batch]:
        if not self.open_batch:
            return None
        self._emit(CancelTimer(("batch",)))
        self.batch_seq += 1
        b = Batch(BatchId(self.node, self.batch_seq), tuple(self.open_batch))
        self.open_batch = []
        for r in b.members:
            self.batched[r.id] = b.id
        self._store(b)
        self._mcast(Kind.REQUEST, payload=b)
        if self.leader:
            self.pipeline_open_instances()
        return b

    # -- coordinator: ordering --------------------------------------------

    def select_unproposed_id(self) -> Value:
        want = BatchId if self.cfg.batching else RequestId
        for v, p in self.req_set.items():
            if not isinstance(v, want) or v in self.proposed or v in self.learned_vals:
                continue
            if all(rid in self.learned_reqs for rid in self._request_ids(v)):
                continue
            return v
        return None

    def _recovering(self) -> bool:
        return any(self.cinst[i].state in ("p1", "fetch") for i in self.open)

    def pipeline_open_instances(self):
        if not self.leader or self._recovering():
            return
        while sum(1 for i in self.open if self.cinst[i].fresh) < self.cfg.pipeline_depth:
            v = self.select_unproposed_id()
            if v is None:
                return
            self.next_instance += 1
            ci = CoordinatorInstance(self.next_instance, fresh=True)
            self.cinst[ci.instance] = ci
            self.open[ci.instance] = None
            if not self._propose(ci, self.lsn, v):
                return

    def _propose(self, ci: CoordinatorInstance, crnd: Round, cval: Value) -> bool:
        i = ci.instance
        st = self.ainst.get(i, AcceptorInstance(i))
        mine = accept_local(st, crnd, cval, self.lsn)
        if mine is None:
            # our own acceptor already promised a higher round
            self.on_denial()
            return False
        ci.crnd, ci.cval, ci.state = crnd, cval, "p2"
        if cval is not None:
            self.proposed.add(cval)
        self._persist_payload(cval)
        self._emit(Persist(CoordinatorRecord(i, crnd, cval)))
        if mine != st:
            self.ainst[i] = mine
            self._emit(Persist(AcceptorRecord(i, mine.rnd, mine.vrnd, mine.vval, mine.sn)))
        self._send_2a(ci)
        self._emit(SetTimer(("retx", i), self.cfg.timeout))
        return True

    def _successor(self) -> int:
        if self.view.dynamic:
            return self.view.dynamic_successor(self.node, self.dyn.d)
        return self.view.successor(self.node)

    def _ring_send(self, target: int, kind: Kind, **kw):
        self._send(target, kind, **kw)
        if self.view.dynamic and target != self.node:
            key = (kw["instance"], kind.value)
            self.pending_ack[key] = (target, kind, kw)
            self._emit(SetTimer(("ack", key), self.cfg.ack_timeout))

    def _send_2a(self, ci: CoordinatorInstance):
        self._ring_send(self._successor(), Kind.PHASE2A, instance=ci.instance,
                        round=ci.crnd, value=ci.cval)

    def _start_phase1(self, i: int):
        ci = CoordinatorInstance(i, crnd=self.lsn, state="p1", fresh=False)
        self.cinst[i] = ci
        self.open[i] = None
        for a in self.view.ring:
            self._send(a, Kind.PHASE1A, instance=i, round=ci.crnd)
        self._emit(SetTimer(("retx", i), self.cfg.timeout))

    def _begin_leadership(self, I: int, resumed):
        for i in range(1, I + 1):
            if i not in self.learned_set and i not in resumed:
                self._start_phase1(i)
        self.next_instance = max(self.next_instance, I)
        # learners may have lost the old leader's last LEARNED along with its beacons
        self.beacons_left = self.cfg.tail_beacons
        self._arm_beacon()
        self.pipeline_open_instances()

    def on_phase1b(self, msg: Message):
        ci = self.cinst.get(msg.instance)
        if not self.leader or ci is None or ci.state != "p1" or msg.round != ci.crnd:
            return
        ci.replies[msg.sender] = (msg.vrnd, msg.vval)
        if len(ci.replies) < self.quorum:
            return
        self.on_phase1b_quorum(ci)

    def on_phase1b_quorum(self, ci: CoordinatorInstance):
        v = choose_value(ci.replies.values(), self.select_unproposed_id())
        if not self._holds(v):
            # a value recovered from Phase 1 is proposed only once its payload is here
            ci.state, ci.cval = "fetch", v
            self.await_propose.setdefault(v, []).append(ci.instance)
            self._fetch(v)
            return
        self._propose(ci, ci.crnd, v)
        if not self._recovering():
            self.pipeline_open_instances()

    def on_denial(self):
        if self.leader:
            self.leader = False
            self._emit(Notify("step_down", (self.node,)))

    def coordinator_on_phase2b(self, msg: Message):
        if self.view.dynamic:
            self._send(msg.sender, Kind.ACK, instance=msg.instance, sn=None)
        ci = self.cinst.get(msg.instance)
        if ci is None or msg.round != ci.crnd:
            return
        if ci.state == "closed":
            if self.now - ci.last_relearn >= self.cfg.timeout:
                ci.last_relearn = self.now
                self._mcast(Kind.LEARNED, instance=ci.instance, value=ci.cval)
            return
        if ci.state != "p2":
            return
        ci.state = "closed"
        ci.last_relearn = self.now
        self.open.pop(ci.instance, None)
        self._emit(CancelTimer(("retx", ci.instance)))
        self._emit(Decide(ci.instance, ci.cval))
        self._mcast(Kind.LEARNED, instance=ci.instance, value=ci.cval)
        self.beacons_left = self.cfg.tail_beacons
        self._arm_beacon()
        self.pipeline_open_instances()

    def _on_retransmit(self, i: int):
        ci = self.cinst.get(i)
        if not self.leader or ci is None or i not in self.open:
            return
        ci.retries += 1
        if ci.retries > self.cfg.retransmit_cap:
            ci.retries = 0
            self._emit(Notify("suspect", (self.node, i)))
        if ci.state == "p1":
            for a in self.view.ring:
                if a not in ci.replies:
                    self._send(a, Kind.PHASE1A, instance=i, round=ci.crnd)
        elif ci.state == "p2":
            self._send_2a(ci)
        self._emit(SetTimer(("retx", i), self.cfg.timeout))

    def _arm_beacon(self):
        if self.leader and not self.beacon_armed:
            self.beacon_armed = True
            self._emit(SetTimer(("beacon",), self.cfg.timeout))

    def _on_beacon(self):
        self.beacon_armed = False
        if not self.leader or self.beacons_left <= 0 or not self.learned_set:
            return
        i = max(self.learned_set)
        self._mcast(Kind.LEARNED, instance=i, value=self.learned_set[i])
        self.beacons_left -= 1
        if self.beacons_left > 0:
            self._arm_beacon()

    def coordinator_on_startup(self, coord: Dict[int, CoordinatorRecord]):
        if not self.leader:
            return
        top = max([self.I, *coord.keys(), *self.ainst.keys()])
        resumed = set()
        for i in range(1, top + 1):
            rec = coord.get(i)
            if rec is not None and rec.crnd == self.lsn:
                ci = CoordinatorInstance(i, rec.crnd, rec.cval, "p2", fresh=i > self.I)
                self.cinst[i] = ci
                self.open[i] = None
                if rec.cval is not None:
                    self.proposed.add(rec.cval)
                self._send_2a(ci)
                self._emit(SetTimer(("retx", i), self.cfg.timeout))
                resumed.add(i)
        self._begin_leadership(top, resumed)

    # -- acceptor ---------------------------------------------------------

    def acceptor_on_startup(self):
        for i in sorted(self.ainst):
            st = self.ainst[i]
            if st.vrnd is None or st.vrnd != self.lsn or not st.sn:
                continue
            self._forward(st.vrnd, st.vval, st.sn, i)

    def _forward(self, crnd: Round, cval: Value, sn: int, i: int):
        if sn < self.quorum - 1:
            self._ring_send(self._successor(), Kind.PHASE2A2B, instance=i, round=crnd,
                            value=cval, sn=sn)
        else:
            self._ring_send(crnd.leader, Kind.PHASE2B, instance=i, round=crnd, value=cval)

    def on_phase1a(self, msg: Message):
        i = msg.instance
        st = self.ainst.get(i, AcceptorInstance(i))
        verdict, new = phase1a(st, msg.round, self.lsn)
        if verdict == "deny":
            self._send(msg.sender, Kind.DENIAL, instance=i, round=msg.round)
            return
        if verdict == "promise":
            self.ainst[i] = new
            self._emit(Persist(AcceptorRecord(i, new.rnd, new.vrnd, new.vval, new.sn or 0)))
        self._send(msg.sender, Kind.PHASE1B, instance=i, round=new.rnd,
                   vrnd=new.vrnd, vval=new.vval)

    def on_phase2(self, msg: Message):
        i = msg.instance
        if self.view.dynamic:
            self._send(msg.sender, Kind.ACK, instance=i, sn=msg.sn)
        st = self.ainst.get(i, AcceptorInstance(i))
        verdict, new, sn = phase2(st, msg.round, msg.value, msg.sn, self.lsn)
        if verdict == "drop":
            return
        if verdict == "accept" and not self._holds(msg.value):
            # accept only what this site could later hand to a learner
            parked = self.await_accept.setdefault(msg.value, [])
            if msg not in parked:
                parked.append(msg)
            self._fetch(msg.value, hint=msg.sender)
            return
        if verdict == "accept":
            self.ainst[i] = new
            self._persist_payload(msg.value)
            self._emit(Persist(AcceptorRecord(i, new.rnd, new.vrnd, new.vval, sn)))
        self._forward(msg.round, msg.value, sn, i)

    def _on_ack(self, msg: Message):
        for kind in (Kind.PHASE2A, Kind.PHASE2A2B, Kind.PHASE2B):
            key = (msg.instance, kind.value)
            hit = self.pending_ack.get(key)
            if hit is not None and hit[0] == msg.sender:
                del self.pending_ack[key]
                self._emit(CancelTimer(("ack", key)))

    def _on_ack_timeout(self, key):
        hit = self.pending_ack.get(key)
        if hit is None:
            return
        target, kind, kw = hit
        stale = kw["round"] != self.view.lsn or (
            kind is Kind.PHASE2A and kw["instance"] not in self.open)
        if stale or (kind is Kind.PHASE2B and target != self.view.leader):
            del self.pending_ack[key]
            return
        if kind is Kind.PHASE2B:
            new_target = target
        else:
            if self._successor() == target:
                self.dyn.step(self.view, self.node)
                self._emit(Notify("dyn_step", (self.node, self.dyn.d)))
            new_target = self._successor()
        self._ring_send(new_target, kind, **kw)

    def acceptor_on_learned(self, v: Value, i: int):
        if i in self.learned_set:
            return
        self.learned_set[i] = v
        self.learned_vals[v] = i
        self._mark_learned(v)

    # -- learner ----------------------------------------------------------

    def learner_on_learned(self, v: Value, i: int):
        if i <= self.executed_upto or i in self.learned:
            return
        self.learned[i] = v
        self.max_seen = max(self.max_seen, i)
        if v is not None and v not in self.req_set:
            self._fetch(v)
        self._try_execute()
        if self.max_seen > self.executed_upto + 1 and not self.gap_armed:
            self.gap_armed = True
            self._emit(SetTimer(("gap",), self.cfg.delta))

    def learner_on_request(self, p: Payload):
        self._store(p)
        self._try_execute()

    def _fetch(self, v: Value, hint: Optional[int] = None):
        if v in self.pending_fetch:
            return
        self.pending_fetch[v] = None
        target = hint if hint is not None and hint != self.node else self._random_coordinator()
        self._send(target, Kind.ID_QUERY, value=v)
        self._emit(SetTimer(("fetch", v), self.cfg.delta))

    def _on_fetch_timer(self, v: Value):
        if v not in self.pending_fetch:
            return
        if v in self.req_set:
            del self.pending_fetch[v]
            return
        self._send(self._random_coordinator(), Kind.ID_QUERY, value=v)
        self._emit(SetTimer(("fetch", v), self.cfg.delta))

    def _on_gap_timer(self):
        self.gap_armed = False
        missing = [j for j in range(self.executed_upto + 1, self.max_seen)
                   if j not in self.learned][: self.cfg.gap_window]
        for j in missing:
            self._send(self._random_coordinator(), Kind.ID_QUERY, instance=j)
        if missing:
            self.gap_armed = True
            self._emit(SetTimer(("gap",), self.cfg.delta))

    def _catchup_probe(self):
        # a restarted learner cannot rely on future traffic to reveal old
        # instances, so it asks for the next one until answers dry up
        self.catchup_mark = self.executed_upto
        self._send(self._random_coordinator(), Kind.ID_QUERY, instance=self.executed_upto + 1)
        self._emit(SetTimer(("catchup",), self.cfg.delta))

    def _on_catchup_timer(self):
        if self.executed_upto > self.catchup_mark:
            self.catchup_idle = 0
        else:
            self.catchup_idle += 1
        if self.catchup_idle < self.cfg.catchup_probes:
            self._catchup_probe()

    def _try_execute(self):
        while self.executed_upto + 1 in self.learned:
            i = self.executed_upto + 1
            v = self.learned[i]
            if v is None:
                members = ()
            else:
                p = self.req_set.get(v)
                if p is None:
                    return
                members = p.members if isinstance(p, Batch) else (p,)
            done = tuple(r.id for r in members if r.id not in self.executed)
            self.executed.update(done)
            self.executed_upto = i
            self._emit(Execute(i, v, done))
            for rid in done:
                self.learned_reqs.add(rid)
                if rid in self.origin:
                    self._send(self.origin.pop(rid), Kind.ID_REPLY, value=rid)
