"""Scenario configuration: dataclasses plus a strict YAML loader.

Unknown keys anywhere in the file are rejected so a typo can never silently
fall back to a default. See ``scripts/configs/*.yaml`` in the repo for
the full schema with every key spelled out.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import List, Optional

import yaml

from ..membership import majority
from ..protocol.proposer import TARGET_POLICIES
from ..protocol.site import ProtocolConfig

ACCEPTOR_BASE = 1
LEARNER_BASE = 101
CLIENT_BASE = 1001


class ScenarioError(ValueError):
    pass


@dataclass
class RequestSchedule:
    count: int = 10
    payload_bytes: int = 1024
    start: int = 1
    interval: int = 1
    target: str = "random-coordinator"
    target_node: Optional[int] = None


@dataclass
class LearnerPlacement:
    colocated: bool = True     # one learner at every acceptor site
    extra: int = 1             # learner-only sites


@dataclass
class CrashEntry:
    node: int
    at: int
    restart: Optional[int] = None


@dataclass
class FaultSpec:
    loss: float = 0.0
    dup: float = 0.0
    min_delay: int = 1
    max_delay: int = 1
    reorder: bool = False
    lan_busy_ticks: int = 0
    detection_delay: int = 30
    quiescence: Optional[int] = None   # faults stop at this tick
    crashes: List[CrashEntry] = field(default_factory=list)


@dataclass
class Scenario:
    n: int = 5
    lans: int = 2
    clients: int = 1
    seed: int = 0
    run_length: int = 200_000
    expect_progress: bool = True
    learners: LearnerPlacement = field(default_factory=LearnerPlacement)
    requests: RequestSchedule = field(default_factory=RequestSchedule)
    faults: FaultSpec = field(default_factory=FaultSpec)
    protocol: ProtocolConfig = field(default_factory=ProtocolConfig)

    @property
    def acceptors(self) -> List[int]:
        return list(range(ACCEPTOR_BASE, ACCEPTOR_BASE + self.n))

    @property
    def learner_only(self) -> List[int]:
        return list(range(LEARNER_BASE, LEARNER_BASE + self.learners.extra))

    @property
    def client_ids(self) -> List[int]:
        return list(range(CLIENT_BASE, CLIENT_BASE + self.clients))

    @property
    def learner_sites(self) -> List[int]:
        return (self.acceptors if self.learners.colocated else []) + self.learner_only

    def validate(self) -> "Scenario":
        if self.n < 3:
            raise ScenarioError(f"n must be >= 3 (got {self.n})")
        if self.lans < 1:
            raise ScenarioError(f"lans must be >= 1 (got {self.lans})")
        if self.clients < 1:
            raise ScenarioError("clients must be >= 1")
        if not self.learner_sites:
            raise ScenarioError("scenario has no learners")
        r = self.requests
        if r.count < 0 or r.payload_bytes < 0 or r.interval < 0 or r.start < 0:
            raise ScenarioError("request schedule fields must be >= 0")
        if r.target not in TARGET_POLICIES:
            raise ScenarioError(f"requests.target must be one of {TARGET_POLICIES}")
        if r.target == "specific" and r.target_node not in self.acceptors:
            raise ScenarioError("requests.target_node must name an acceptor")
        p = self.protocol
        if p.forward_policy not in ("random", "leader", "non_leader"):
            raise ScenarioError("protocol.forward_policy must be random|leader|non_leader")
        for name in ("delta", "timeout", "max_batch_size", "max_batch_delay",
                     "pipeline_depth", "ack_timeout", "retransmit_cap", "client_timeout"):
            if getattr(p, name) < 1:
                raise ScenarioError(f"protocol.{name} must be >= 1")
        f = self.faults
        for c in f.crashes:
            if c.node not in self.acceptors and c.node not in self.learner_only:
                raise ScenarioError(f"crash entry names unknown site {c.node}")
            if c.restart is not None and c.restart <= c.at:
                raise ScenarioError("crash restart must come after the crash")
        permanent_down = {c.node for c in f.crashes
                          if c.node in self.acceptors and c.restart is None}
        if self.n - len(permanent_down) < majority(self.n) and self.expect_progress:
            raise ScenarioError("crash schedule leaves no live majority; "
                                "set expect_progress: false to run it anyway")
        try:
            self.fault_profile()
        except ValueError as e:
            raise ScenarioError(f"faults: {e}") from None
        return self

    def fault_profile(self):
        from ..simnet import FaultProfile
        f = self.faults
        return FaultProfile(f.loss, f.dup, f.min_delay, f.max_delay, f.reorder,
                            f.lan_busy_ticks)


def _build(cls, data, path):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ScenarioError(f"{path or 'scenario'}: expected a mapping")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(fields))
    if unknown:
        raise ScenarioError(f"{path or 'scenario'}: unknown key(s) {', '.join(unknown)}")
    kw = {}
    for k, v in data.items():
        sub = _NESTED.get((cls, k))
        where = f"{path}.{k}" if path else k
        if sub is list:
            kw[k] = [_build(CrashEntry, x, f"{where}[{j}]") for j, x in enumerate(v or [])]
        elif sub is not None:
            kw[k] = _build(sub, v, where)
        else:
            kw[k] = v
    try:
        return cls(**kw)
    except TypeError as e:
        raise ScenarioError(f"{path or 'scenario'}: {e}") from None


_NESTED = {
    (Scenario, "learners"): LearnerPlacement,
    (Scenario, "requests"): RequestSchedule,
    (Scenario, "faults"): FaultSpec,
    (Scenario, "protocol"): ProtocolConfig,
    (FaultSpec, "crashes"): list,
}


def scenario_from_dict(data: dict) -> Scenario:
    return _build(Scenario, data, "").validate()


def load_scenario(path: str) -> Scenario:
    with open(path) as fh:
        try:
            data = yaml.safe_load(fh)
        except yaml.YAMLError as e:
            raise ScenarioError(f"{path}: {e}") from None
    return scenario_from_dict(data or {})


def scenario_to_dict(s: Scenario) -> dict:
    return dataclasses.asdict(s)
