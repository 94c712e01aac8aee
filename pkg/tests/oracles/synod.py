"""Brute-force single-decree Paxos, written from the textbook rules only.

Rounds are plain ints. Each acceptor is (promised, accepted_round,
accepted_value) with -1 / None for "nothing". Messages stay in the network
forever once sent, so any message may be delivered any number of times or
never. A value is learnable if some reachable state has a majority that
accepted it in the same round.
"""
from itertools import combinations

NONE = -1


def learnable(prior, proposals, n=3):
    """prior: tuple of acceptor triples; proposals: {round: own value}."""
    majority = n // 2 + 1
    start = (tuple(prior), frozenset(("1a", r) for r in proposals), frozenset())
    seen = {start}
    stack = [start]
    out = set()
    while stack:
        acc, net, picked = stack.pop()
        for r in {ar for _, ar, _ in acc if ar != NONE}:
            for v in {av for _, ar, av in acc if ar == r}:
                if sum(1 for _, ar, av in acc if ar == r and av == v) >= majority:
                    out.add(v)
        for nxt in _successors(acc, net, picked, proposals, n, majority):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return out


def _successors(acc, net, picked, proposals, n, majority):
    for m in net:
        if m[0] == "1a":
            r = m[1]
            for a in range(n):
                p, ar, av = acc[a]
                if r > p:
                    new = acc[:a] + ((r, ar, av),) + acc[a + 1:]
                    yield new, net | {("1b", r, a, ar, av)}, picked
        elif m[0] == "2a":
            _, r, v = m
            for a in range(n):
                p, ar, av = acc[a]
                if r >= p and (ar, av) != (r, v):
                    new = acc[:a] + ((r, r, v),) + acc[a + 1:]
                    yield new, net, picked
    # a coordinator that has not yet picked may use any quorum of promises
    for r, own in proposals.items():
        if r in picked:
            continue
        promises = {m[2]: m for m in net if m[0] == "1b" and m[1] == r}
        for q in combinations(sorted(promises), majority):
            reps = [promises[a] for a in q]
            top = max(m[3] for m in reps)
            v = own if top == NONE else next(m[4] for m in reps if m[3] == top)
            yield acc, net | {("2a", r, v)}, picked | {r}
