"""Exhaustive interleavings of one consensus instance run through the
package's acceptor/coordinator rules with ring-shaped Phase 2.

Each competing round gets a leader and a ring (leader first, then m-1 other
acceptors); every leader/ring choice is explored. Phase 1 goes to the ring
members, the leader keeps the first m replies, accepts locally with sn 0,
and the value travels the ring as PHASE2A / PHASE2A2B until the last member
returns PHASE2B. A value is learnable if some leader receives PHASE2B for it.
"""
from itertools import permutations, product

from htring.core import Round
from htring.protocol.instance import accept_local, choose_value, phase1a, phase2


def rings(n, m):
    for leader in range(1, n + 1):
        others = [a for a in range(1, n + 1) if a != leader]
        for tail in permutations(others, m - 1):
            yield (leader,) + tail


def learnable(prior, rounds, n=3):
    """prior: {acceptor: AcceptorInstance}; rounds: [(number, own value)]."""
    m = n // 2 + 1
    out = set()
    for choice in product(list(rings(n, m)), repeat=len(rounds)):
        setup = {}
        for (number, own), ring in zip(rounds, choice):
            setup[Round(number, ring[0])] = (ring, own)
        out |= _explore(prior, setup, n, m)
    return out


def _explore(prior, setup, n, m):
    acc0 = tuple(prior[a] for a in range(1, n + 1))
    net0 = frozenset(("1a", r, a) for r, (ring, _) in setup.items() for a in ring)
    coord0 = tuple((r, ()) for r in sorted(setup))   # replies so far; None once proposed
    start = (acc0, net0, coord0)
    seen = {start}
    stack = [start]
    out = set()
    while stack:
        state = stack.pop()
        for nxt, decided in _step(state, setup, m):
            if decided is not None:
                out.add(decided[0])
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return out


def _set(acc, a, st):
    return acc[:a - 1] + (st,) + acc[a:]


def _step(state, setup, m):
    acc, net, coord = state
    for msg in net:
        kind = msg[0]
        if kind == "1a":
            _, r, a = msg
            verdict, new = phase1a(acc[a - 1], r)
            if verdict == "deny":
                continue
            yield (_set(acc, a, new), net | {("1b", r, a, new.vrnd, new.vval)}, coord), None
        elif kind == "1b":
            _, r, a, vrnd, vval = msg
            k = [c[0] for c in coord].index(r)
            replies = coord[k][1]
            if replies is None or any(x[0] == a for x in replies) or len(replies) >= m:
                continue
            replies = replies + ((a, vrnd, vval),)
            ring, own = setup[r]
            if len(replies) < m:
                yield (acc, net, coord[:k] + ((r, replies),) + coord[k + 1:]), None
                continue
            v = choose_value([(x[1], x[2]) for x in replies], own)
            leader = ring[0]
            mine = accept_local(acc[leader - 1], r, v)
            done = coord[:k] + ((r, None),) + coord[k + 1:]
            if mine is None:
                yield (acc, net, done), None
                continue
            fwd = ("2a", r, ring[1], v, None) if m > 1 else ("2b", r, v)
            yield (_set(acc, leader, mine), net | {fwd}, done), None
        elif kind == "2a":
            _, r, a, v, sn_in = msg
            verdict, new, sn = phase2(acc[a - 1], r, v, sn_in)
            if verdict == "drop":
                continue
            ring, _ = setup[r]
            nxt = ("2a", r, ring[sn + 1], v, sn) if sn < m - 1 else ("2b", r, v)
            yield (_set(acc, a, new), net | {nxt}, coord), None
        elif kind == "2b":
            yield state, (msg[2],)
