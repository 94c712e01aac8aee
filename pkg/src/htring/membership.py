"""Leader election, ring views, LAN broadcaster assignment, dynamic successors.

Election is a deterministic stand-in run by the harness between event steps:
the lowest-numbered live broadcaster wins, the new lsn is one above the
highest lsn any live acceptor has stored, and ``I`` is the highest instance
any live acceptor has written.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import FrozenSet, Iterable, Mapping, Optional, Sequence, Tuple

from .core import Round, round_key


class NoQuorum(Exception):
    """Fewer than a majority of acceptors are alive; the operation blocks."""


class RingExhausted(Exception):
    """Dynamic successor distance grew past the number of acceptors."""


def majority(n: int) -> int:
    return n // 2 + 1


@dataclass(frozen=True)
class LanAssignment:
    lans: int
    broadcaster_of: Mapping[int, int]          # lan -> node
    lans_of: Mapping[int, FrozenSet[int]]      # node -> lans

    def is_broadcaster(self, node: int) -> bool:
        return bool(self.lans_of.get(node))

    @property
    def broadcasters(self) -> Tuple[int, ...]:
        return tuple(sorted(n for n, ls in self.lans_of.items() if ls))


def assign_broadcasters(acceptors: Iterable[int], lans: int,
                        leader: Optional[int] = None) -> LanAssignment:
    """Round-robin LANs over acceptors in id order, leader first."""
    if lans < 1:
        raise ValueError("need at least one LAN")
    order = sorted(acceptors)
    if not order:
        raise ValueError("need at least one acceptor")
    if leader is not None:
        order.remove(leader)
        order.insert(0, leader)
    owner = {lan: order[lan % len(order)] for lan in range(lans)}
    lans_of = {a: frozenset(l for l, o in owner.items() if o == a) for a in order}
    return LanAssignment(lans, owner, lans_of)


@dataclass(frozen=True)
class RingView:
    view: int
    ring: Tuple[int, ...]
    leader: int
    lsn: Round
    I: int
    acceptors: Tuple[int, ...]
    dynamic: bool = False

    @property
    def size(self) -> int:
        # |Q_a|: ring positions a Phase 2 message visits, leader included
        return majority(len(self.acceptors))

    def successor(self, node: int) -> int:
        if node in self.ring:
            k = self.ring.index(node)
            return self.ring[(k + 1) % len(self.ring)]
        return self.ring[0]

    def position(self, node: int) -> int:
        """1-based index j used by the dynamic successor rule."""
        return self.acceptors.index(node) + 1

    def dynamic_successor(self, node: int, d: int) -> int:
        n = len(self.acceptors)
        if d >= n:
            raise RingExhausted(f"d={d} with n={n}")
        j = self.position(node)
        return self.acceptors[(j - 1 + d) % n]


def elect_leader(alive: Iterable[int], n: int, known_lsn: Mapping[int, Optional[Round]],
                 max_instance: Mapping[int, int],
                 broadcasters: Iterable[int] = ()) -> Tuple[int, Round, int]:
    alive = sorted(alive)
    if len(alive) < majority(n):
        raise NoQuorum(f"{len(alive)} alive of {n}")
    live_b = [a for a in alive if a in set(broadcasters)]
    leader = live_b[0] if live_b else alive[0]
    top = max((known_lsn.get(a) for a in alive), key=round_key, default=None)
    number = 0 if top is None else top.number
    I = max((max_instance.get(a, 0) for a in alive), default=0)
    return leader, Round(number + 1, leader), I


def build_ring(alive: Iterable[int], leader: int, acceptors: Sequence[int], view: int,
               lsn: Round, I: int, dynamic: bool = False) -> RingView:
    m = majority(len(acceptors))
    alive = set(alive)
    if leader not in alive:
        raise ValueError("leader must be alive")
    others = sorted(a for a in alive if a != leader)
    if 1 + len(others) < m:
        raise NoQuorum(f"need {m} ring members, {1 + len(others)} alive")
    ring = (leader,) + tuple(others[: m - 1])
    return RingView(view, ring, leader, lsn, I, tuple(sorted(acceptors)), dynamic)


def view_change(current: RingView, failed: int, alive: Iterable[int],
                known_lsn: Mapping[int, Optional[Round]] = None,
                max_instance: Mapping[int, int] = None,
                broadcasters: Iterable[int] = ()) -> Optional[RingView]:
    """New view without ``failed``; returns None if it was not a ring member.

    A failed leader triggers a fresh election first.
    """
    alive = set(alive) - {failed}
    if current.leader == failed:
        leader, lsn, I = elect_leader(alive, len(current.acceptors), known_lsn or {},
                                      max_instance or {}, broadcasters)
        return build_ring(alive, leader, current.acceptors, current.view + 1, lsn, I,
                          current.dynamic)
    if failed not in current.ring or current.dynamic:
        return None
    return build_ring(alive, current.leader, current.acceptors, current.view + 1,
                      current.lsn, current.I, current.dynamic)


@dataclass
class DynamicRingState:
    """Per-node hop distance for the (j + d) mod n successor rule."""

    d: int = 1
    increments: int = 0

    def step(self, view: RingView, node: int) -> int:
        """An ACK timed out: widen the hop and return the new successor."""
        self.d += 1
        self.increments += 1
        return view.dynamic_successor(node, self.d)
