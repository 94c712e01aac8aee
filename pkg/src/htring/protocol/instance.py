"""Single-instance acceptor and coordinator rules, as pure functions.

These carry the Paxos logic of one consensus instance. The site state
machine wraps them with routing, persistence and timers; the exhaustive
interleaving tests drive them directly.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Optional, Tuple

from ..core import Round, Value, round_key


class ProtocolViolation(AssertionError):
    """Phase 1 replies report two different values at the highest round."""


@dataclass(frozen=True)
class AcceptorInstance:
    instance: int
    rnd: Optional[Round] = None
    vrnd: Optional[Round] = None
    vval: Value = None
    sn: Optional[int] = None


def effective_rnd(st: AcceptorInstance, floor: Optional[Round]) -> Optional[Round]:
    # the elected lsn acts as a promise for every instance at once
    return max(st.rnd, floor, key=round_key)


def phase1a(st: AcceptorInstance, crnd: Round,
            floor: Optional[Round] = None) -> Tuple[str, AcceptorInstance]:
    """Returns ``("promise" | "repeat" | "deny", new_state)``."""
    if round_key(crnd) < round_key(effective_rnd(st, floor)):
        return "deny", st
    if crnd == st.rnd:
        return "repeat", st
    return "promise", replace(st, rnd=crnd)


def phase2(st: AcceptorInstance, crnd: Round, cval: Value, sn_in: Optional[int],
           floor: Optional[Round] = None) -> Tuple[str, AcceptorInstance, int]:
    """Returns ``("accept" | "repeat" | "drop", new_state, sn)``.

    ``sn`` is the ring position of this acceptor, recomputed from the
    carried counter (absent for PHASE2A) so retransmissions land on the
    same position.
    """
    sn = (0 if sn_in is None else sn_in) + 1
    if round_key(crnd) < round_key(effective_rnd(st, floor)):
        return "drop", st, sn
    if crnd == st.vrnd:
        if cval != st.vval:
            raise ProtocolViolation(f"two values at round {crnd} in instance {st.instance}")
        return "repeat", st, sn
    return "accept", replace(st, rnd=crnd, vrnd=crnd, vval=cval, sn=sn), sn


def accept_local(st: AcceptorInstance, crnd: Round, cval: Value,
                 floor: Optional[Round] = None) -> Optional[AcceptorInstance]:
    """The leader's own acceptor taking the value it is about to send (sn 0)."""
    if round_key(crnd) < round_key(effective_rnd(st, floor)):
        return None
    if crnd == st.vrnd:
        return st
    return replace(st, rnd=crnd, vrnd=crnd, vval=cval, sn=0)


def choose_value(replies: Iterable[Tuple[Optional[Round], Value]], fresh: Value) -> Value:
    """Pick the Phase 2 value from a quorum of (vrnd, vval) replies."""
    replies = list(replies)
    k = max((r for r, _ in replies), key=round_key, default=None)
    if k is None:
        return fresh
    values = {v for r, v in replies if r == k}
    if len(values) != 1:
        raise ProtocolViolation(f"values {sorted(map(str, values))} at round {k}")
    return values.pop()
