"""Seeded generator of hostile scenarios: lossy, duplicating, reordering
networks plus minority crash/restart schedules that often hit the leader."""
from __future__ import annotations

import random

from ..protocol.site import ProtocolConfig
from .scenario import CrashEntry, FaultSpec, LearnerPlacement, RequestSchedule, Scenario

QUIESCENCE = 1500


def adversarial_scenario(seed: int, requests: int = 5) -> Scenario:
    rng = random.Random(f"adversary/{seed}")
    n = rng.choice((3, 5, 7))
    f = (n - 1) // 2
    crashes = []
    victims = rng.sample(range(1, n + 1), rng.randint(0, f))
    if victims and rng.random() < 0.5 and 1 not in victims:
        victims[0] = 1          # the initial leader
    for v in victims:
        at = rng.randint(5, 400)
        permanent = rng.random() < 0.25
        restart = None if permanent else at + rng.randint(1, 300)
        crashes.append(CrashEntry(v, at, restart))
    target = rng.choice(("leader", "random-broadcaster", "random-coordinator"))
    return Scenario(
        n=n,
        lans=rng.randint(1, 3),
        clients=rng.randint(1, 3),
        seed=seed,
        run_length=60_000,
        learners=LearnerPlacement(colocated=True, extra=1),
        requests=RequestSchedule(count=requests, payload_bytes=rng.choice((0, 64, 512)),
                                 start=1, interval=rng.randint(1, 40), target=target),
        faults=FaultSpec(loss=round(rng.uniform(0, 0.3), 3), dup=round(rng.uniform(0, 0.2), 3),
                         min_delay=1, max_delay=rng.randint(1, 4), reorder=True,
                         detection_delay=rng.randint(5, 60), quiescence=QUIESCENCE,
                         crashes=crashes),
        protocol=ProtocolConfig(batching=rng.random() < 0.3, max_batch_size=rng.randint(2, 4),
                                pipeline_depth=rng.randint(1, 4),
                                forward_policy=rng.choice(("random", "leader", "non_leader"))),
    ).validate()
