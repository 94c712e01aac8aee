"""Wires sites, proposers, stores and the simulator; plays the membership service.

The cluster object is the simulator's controller: it runs elections, rebuilds
the ring when a member fails, and rebalances LAN broadcaster duty. It sees
every store, which stands in for the failure detector and election protocol
that a real deployment would run.
"""
from __future__ import annotations

import os
import random
from typing import Dict, List, Optional

from ..core import ClientState, Request, fresh_request_id, round_key
from ..membership import (LanAssignment, NoQuorum, RingView, assign_broadcasters,
                          build_ring, elect_leader)
from ..protocol.proposer import Proposer
from ..protocol.site import Site
from ..simnet import Controller, FaultProfile, Simulator
from ..storage import ELECTION, ElectionRecord, FileStore, MemoryStore
from .scenario import Scenario


class Cluster(Controller):
    def __init__(self, scenario: Scenario, store_dir: Optional[str] = None):
        s = self.scenario = scenario
        seed = s.seed
        sites = s.acceptors + s.learner_only
        self.nodes: Dict[int, object] = {}
        for a in s.acceptors:
            self.nodes[a] = Site(a, acceptor=True, learner=s.learners.colocated, sites=sites,
                                 config=s.protocol, rng=random.Random(f"site/{seed}/{a}"))
        for l in s.learner_only:
            self.nodes[l] = Site(l, acceptor=False, learner=True, sites=sites,
                                 config=s.protocol, rng=random.Random(f"site/{seed}/{l}"))
        for c in s.client_ids:
            self.nodes[c] = Proposer(c, c, policy=s.requests.target,
                                     target=s.requests.target_node,
                                     timeout=s.protocol.client_timeout,
                                     rng=random.Random(f"client/{seed}/{c}"))
        stores = {}
        for n in self.nodes:
            if store_dir is not None:
                stores[n] = FileStore(n, os.path.join(store_dir, f"node{n}.log"))
            else:
                stores[n] = MemoryStore(n)
        self.sim = Simulator(self.nodes, sites, s.fault_profile(), seed, self, stores)
        self.view: Optional[RingView] = None
        self.lans: Optional[LanAssignment] = None
        self.blocked = False
        self.view_changes = 0      # ring or leader replaced after the first view
        self.elections = 0
        self.dyn_steps = 0
        self.submitted: List[str] = []
        self._crash_restart: Optional[int] = None

    def crash_at_event(self, event_index: int, node: int, restart_delay: Optional[int],
                       after_persist: bool = True):
        """Crash ``node`` while the simulator processes event number
        ``event_index`` (right after its first stable write there, if any),
        then restart it ``restart_delay`` ticks later."""
        self.sim.crash_point = (event_index, node, after_persist)
        self._crash_restart = restart_delay

    # -- setup ------------------------------------------------------------

    def start(self):
        s, sim = self.scenario, self.sim
        self._elect(sim)
        clients = {c: ClientState(c) for c in s.client_ids}
        r = s.requests
        for k in range(r.count):
            c = s.client_ids[k % len(s.client_ids)]
            req = Request(fresh_request_id(clients[c]), bytes(r.payload_bytes))
            self.submitted.append(str(req.id))
            sim.submit(r.start + k * r.interval, c, req)
        for c in s.faults.crashes:
            sim.crash(c.at, c.node)
            if c.restart is not None:
                sim.restart(c.restart, c.node)
        q = s.faults.quiescence
        if q is not None:
            p = sim.profile
            calm = FaultProfile(0.0, 0.0, p.min_delay, p.max_delay, p.reorder,
                                p.lan_busy_ticks)
            sim.call(q, lambda sm: setattr(sm, "profile", calm))

    def run(self):
        self.start()
        self.sim.run(until=self.scenario.run_length)
        self.sim.trace.append({"t": self.sim.now, "ev": "end",
                               "drained": not self.sim.pending()})
        return self.sim.trace

    # -- membership -------------------------------------------------------

    def _alive_acceptors(self, sim) -> List[int]:
        return [a for a in self.scenario.acceptors if sim.alive[a]]

    def _elect(self, sim):
        s = self.scenario
        alive = self._alive_acceptors(sim)
        known = {}
        for a in alive:
            rec = sim.stores[a].get(ELECTION)
            lsn = rec.lsn if rec is not None else None
            if self.view is not None:
                lsn = max(lsn, self.view.lsn, key=round_key)
            known[a] = lsn
        maxi = {a: sim.stores[a].max_instance() for a in alive}
        bcast = self.lans.broadcasters if self.lans else ()
        number = self.view.view + 1 if self.view else 1
        try:
            leader, lsn, I = elect_leader(alive, s.n, known, maxi, bcast)
            view = build_ring(alive, leader, s.acceptors, number, lsn, I,
                              s.protocol.dynamic_ring)
        except NoQuorum:
            self.blocked = True
            return
        self.blocked = False
        if self.view is not None:
            self.view_changes += 1
        self.elections += 1
        self.view = view
        self.lans = assign_broadcasters(alive, s.lans, leader)
        for a in alive:
            sim.persist_direct(a, ElectionRecord(a == leader, I, lsn))
        sim.install_view(self.view, self.lans, elected=True)

    def _rebalance(self, sim, ring_failed: bool = False):
        s = self.scenario
        alive = self._alive_acceptors(sim)
        view = self.view
        if not sim.alive[view.leader]:
            return      # the pending leader detection will elect instead
        if ring_failed:
            try:
                view = build_ring(alive, view.leader, s.acceptors, view.view + 1, view.lsn,
                                  view.I, view.dynamic)
            except NoQuorum:
                self.blocked = True
                return
        lans = assign_broadcasters(alive, s.lans, view.leader)
        if view is self.view and lans == self.lans:
            return
        if view is not self.view:
            self.view_changes += 1
        self.view, self.lans = view, lans
        sim.install_view(view, lans, elected=False)

    def on_crash(self, sim, node):
        cp = sim.crash_point
        if cp is not None and cp[1] == node and cp[0] == sim.events_processed:
            if self._crash_restart is not None:
                sim.restart(sim.now + self._crash_restart, node)
        if node in self.scenario.acceptors:
            sim.detect(sim.now + self.scenario.faults.detection_delay, node)

    def on_detect(self, sim, node):
        if sim.alive[node] or self.view is None:
            return
        if self.blocked:
            self._elect(sim)
            return
        if node == self.view.leader:
            self._elect(sim)
            return
        ring_failed = node in self.view.ring and not self.view.dynamic
        self._rebalance(sim, ring_failed)

    def before_restart(self, sim, node):
        if node not in self.scenario.acceptors or self.view is None:
            return
        rec = sim.stores[node].get(ELECTION)
        if rec is None or rec.lsn != self.view.lsn:
            # the node missed an election while down; it comes back as a follower
            sim.persist_direct(node, ElectionRecord(node == self.view.leader, self.view.I,
                                                    self.view.lsn))
        sim.call(sim.now, lambda sm: self._after_restart(sm, node))

    def _after_restart(self, sim, node):
        if not sim.alive[node]:
            return
        if self.blocked:
            self._elect(sim)
            return
        dead = [a for a in self.view.ring if not sim.alive[a]]
        self._rebalance(sim, ring_failed=bool(dead) and not self.view.dynamic)

    def on_notify(self, sim, node, action):
        if action.what == "dyn_step":
            self.dyn_steps += 1
        elif action.what == "step_down":
            if self.view is not None and node == self.view.leader:
                sim.call(sim.now, self._elect)
        elif action.what == "suspect":
            if self.view is not None and not self.view.dynamic:
                if any(not sim.alive[a] for a in self.view.ring):
                    sim.call(sim.now, lambda sm: self._rebalance(sm, ring_failed=True))

    def current_view(self):
        return self.view, self.lans
