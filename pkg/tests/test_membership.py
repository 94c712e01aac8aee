import pytest
from hypothesis import given, strategies as st

from htring.core import Round
from htring.membership import (DynamicRingState, NoQuorum, RingExhausted, assign_broadcasters,
                               build_ring, elect_leader, majority, view_change)


def ring5(alive=(1, 2, 3, 4, 5), leader=1):
    return build_ring(alive, leader, [1, 2, 3, 4, 5], 1, Round(1, leader), 0)


def test_election_examples():
    alive = [1, 2, 3, 4, 5]
    leader, lsn, I = elect_leader(alive, 5, {a: Round(3, 2) for a in alive}, {3: 7}, [1, 2])
    assert (leader, lsn.number, I) == (1, 4, 7)
    leader, lsn, _ = elect_leader([2, 3, 4, 5], 5, {}, {}, [1, 2])
    assert leader == 2
    with pytest.raises(NoQuorum):
        elect_leader([1, 2], 5, {}, {})


def test_successive_elections_increase_lsn():
    known = {}
    last = None
    for _ in range(4):
        leader, lsn, _ = elect_leader([1, 2, 3], 3, known, {})
        assert last is None or lsn > last
        known = {a: lsn for a in (1, 2, 3)}
        last = lsn


def test_ring_examples():
    assert ring5().ring == (1, 2, 3)
    assert ring5((1, 3, 4, 5)).ring == (1, 3, 4)
    assert build_ring([1, 2, 3, 4], 1, [1, 2, 3, 4], 1, Round(1, 1), 0).size == 3
    with pytest.raises(NoQuorum):
        ring5((1, 2))


def test_view_change_examples():
    v = ring5()
    nv = view_change(v, 3, [1, 2, 4, 5])
    assert nv.ring == (1, 2, 4) and nv.lsn == v.lsn
    assert view_change(v, 5, [1, 2, 3, 4]) is None
    led = view_change(v, 1, [2, 3, 4, 5], {a: v.lsn for a in (2, 3, 4, 5)}, {}, [1, 2])
    assert led.leader == 2 and led.lsn > v.lsn and led.ring[0] == 2


@given(st.integers(3, 15), st.data())
def test_ring_members_alive_and_majority(n, data):
    acceptors = list(range(1, n + 1))
    alive = data.draw(st.sets(st.sampled_from(acceptors), min_size=majority(n)))
    leader = data.draw(st.sampled_from(sorted(alive)))
    v = build_ring(alive, leader, acceptors, 1, Round(1, leader), 0)
    assert set(v.ring) <= alive and len(v.ring) == majority(n) == v.size
    assert v.ring[0] == leader and len(set(v.ring)) == len(v.ring)


def test_lan_examples():
    a = assign_broadcasters([1, 2, 3, 4], 4)
    assert all(len(a.lans_of[x]) == 1 for x in (1, 2, 3, 4))
    counts = sorted((len(v) for v in assign_broadcasters([1, 2, 3], 4).lans_of.values()),
                    reverse=True)
    assert counts == [2, 1, 1]
    b = assign_broadcasters([1, 2, 3, 4, 5], 2)
    assert len(b.broadcasters) == 2


@given(st.sets(st.integers(1, 20), min_size=1), st.integers(1, 12), st.data())
def test_lan_balance(acceptors, lans, data):
    leader = data.draw(st.sampled_from(sorted(acceptors)))
    a = assign_broadcasters(acceptors, lans, leader)
    counts = [len(a.lans_of[x]) for x in acceptors]
    assert max(counts) - min(counts) <= 1
    assert sum(counts) == lans
    assert a.is_broadcaster(leader)
    assert all(a.broadcaster_of[l] in acceptors for l in range(lans))


def test_dynamic_successor():
    v = build_ring([1, 2, 3, 4, 5], 1, [1, 2, 3, 4, 5], 1, Round(1, 1), 0, dynamic=True)
    assert v.dynamic_successor(1, 1) == 2
    st_ = DynamicRingState()
    assert st_.step(v, 1) == 3 and st_.d == 2 and st_.increments == 1
    assert v.dynamic_successor(5, 1) == 1
    with pytest.raises(RingExhausted):
        v.dynamic_successor(1, 5)
