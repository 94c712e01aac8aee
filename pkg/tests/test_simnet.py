import pytest
from hypothesis import given, settings, strategies as st

from htring.core import Kind, Message, Multicast, Unicast
from htring.harness import run_scenario, scenario_from_dict
from htring.harness.checks import check_conservation
from htring.protocol.actions import Mcast, Send
from htring.simnet import FaultProfile, Simulator, TraceError, dump_trace, load_trace


class Echo:
    """Answers every ID_QUERY with an ID_REPLY; enough to exercise the network."""

    def __init__(self, node):
        self.node = node
        self.seen = []

    def deliver(self, msg, now=0):
        self.seen.append((now, msg))
        if msg.kind is Kind.ID_QUERY:
            return [Send(msg.sender, Message(Kind.ID_REPLY, self.node, Unicast(msg.sender)))]
        return []

    def timer(self, key, now=0):
        return []


def world(n=3, subscribers=None, **profile):
    nodes = {k: Echo(k) for k in range(1, n + 1)}
    sim = Simulator(nodes, subscribers or list(nodes), FaultProfile(**profile), seed=3)
    return sim, nodes


def kick(sim, src, acts):
    sim.call(0, lambda s: s._apply(src, acts, None, None))


def query(src, dst):
    return Send(dst, Message(Kind.ID_QUERY, src, Unicast(dst)))


def test_lossless_delivery_one_tick_later():
    sim, nodes = world()
    kick(sim, 1, [query(1, 2)])
    sim.run()
    assert [t for t, _ in nodes[2].seen] == [1]
    assert [t for t, _ in nodes[1].seen] == [2]


def test_duplication_one_delivers_twice():
    sim, nodes = world(dup=1.0)
    kick(sim, 1, [Send(2, Message(Kind.ID_REPLY, 1, Unicast(2)))])
    sim.run()
    assert len(nodes[2].seen) == 2


def test_multicast_reaches_every_subscriber_but_sender():
    sim, nodes = world(n=10)
    kick(sim, 1, [Mcast(Message(Kind.LEARNED, 1, Multicast(0), 1))])
    sim.run()
    assert sum(len(nodes[k].seen) for k in nodes) == 9
    assert not nodes[1].seen


def test_crashed_node_drops_and_restart_of_live_node_is_noop():
    sim, nodes = world()
    sim.crash(0, 2)
    kick(sim, 1, [query(1, 2)])
    sim.restart(0, 3)
    sim.run()
    assert not nodes[2].seen
    evs = [r["ev"] for r in sim.trace]
    assert "drop" in evs and "restart" not in evs


def test_bad_fault_profile():
    with pytest.raises(ValueError):
        FaultProfile(loss=1.5)
    with pytest.raises(ValueError):
        FaultProfile(min_delay=3, max_delay=2)


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 0.5), st.floats(0, 0.5), st.integers(1, 4), st.booleans(),
       st.integers(0, 10**6))
def test_conservation_and_determinism(loss, dup, spread, reorder, seed):
    def go():
        nodes = {k: Echo(k) for k in range(1, 5)}
        sim = Simulator(nodes, list(nodes), FaultProfile(loss, dup, 1, spread, reorder), seed)
        for k in range(1, 5):
            for j in range(1, 5):
                if j != k:
                    sim.call(k, lambda s, k=k, j=j: s._apply(k, [query(k, j)], None, None))
        sim.crash(3, 4)
        sim.run()
        sim.trace.append({"t": sim.now, "ev": "end", "drained": True})
        return sim.trace
    a, b = go(), go()
    assert dump_trace(a) == dump_trace(b)
    assert check_conservation(a) == []


def test_trace_roundtrip_and_corruption():
    sim, _ = world()
    kick(sim, 1, [query(1, 2)])
    sim.run()
    text = dump_trace(sim.trace)
    assert [{k: v for k, v in r.items() if k != "_line"} for r in load_trace(text)] == sim.trace
    lines = text.splitlines()
    lines[1] = lines[1][:-5]
    with pytest.raises(TraceError) as e:
        load_trace("\n".join(lines))
    assert e.value.line == 2


def test_majority_crash_stalls_then_recovers_safely():
    s = scenario_from_dict({
        "n": 5, "expect_progress": False,
        "requests": {"count": 6, "start": 1, "interval": 40},
        "faults": {"crashes": [{"node": n, "at": 50, "restart": 600} for n in (2, 3, 4)]},
    })
    res = run_scenario(s)
    assert res.safe
    decided = [r for r in res.trace if r["ev"] == "decide"]
    assert not any(50 < r["t"] < 600 for r in decided)
    assert res.summary["learned"] == 6
