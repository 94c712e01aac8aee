"""Whole-system invariants over randomly drawn small scenarios."""
from hypothesis import HealthCheck, given, settings, strategies as st

from htring.harness import run_scenario, scenario_from_dict
from htring.membership import majority


@st.composite
def scenarios(draw):
    n = draw(st.sampled_from([3, 4, 5, 7]))
    f = n - majority(n)
    victims = draw(st.lists(st.integers(1, n), unique=True, max_size=f))
    crashes = []
    for v in victims:
        at = draw(st.integers(2, 300))
        restart = draw(st.one_of(st.none(), st.integers(at + 1, at + 300)))
        crashes.append({"node": v, "at": at, "restart": restart})
    return scenario_from_dict({
        "n": n,
        "lans": draw(st.integers(1, 3)),
        "clients": draw(st.integers(1, 3)),
        "seed": draw(st.integers(0, 10**6)),
        "run_length": 40_000,
        "requests": {"count": draw(st.integers(1, 8)),
                     "interval": draw(st.integers(0, 20)),
                     "payload_bytes": draw(st.sampled_from([0, 100, 2000])),
                     "target": draw(st.sampled_from(["leader", "random-broadcaster",
                                                     "random-coordinator"]))},
        "faults": {"loss": draw(st.floats(0, 0.3)), "dup": draw(st.floats(0, 0.2)),
                   "max_delay": draw(st.integers(1, 3)), "reorder": True,
                   "detection_delay": draw(st.integers(5, 50)), "quiescence": 1000,
                   "crashes": crashes},
        "protocol": {"batching": draw(st.booleans()),
                     "max_batch_size": draw(st.integers(1, 4)),
                     "pipeline_depth": draw(st.integers(1, 5)),
                     "dynamic_ring": False},
    })


@settings(max_examples=120, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(scenarios())
def test_safe_and_live_with_correct_majority(s):
    res = run_scenario(s)
    assert res.safe, {k: v[:2] for k, v in res.verdicts.items() if v}
    # every crash schedule above leaves a permanent majority up and a learner correct
    assert not res.progress, res.progress[:3]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.integers(3, 7))
def test_learners_agree_on_a_prefix(seed, n):
    s = scenario_from_dict({"n": n, "seed": seed, "clients": 2,
                            "requests": {"count": 6, "interval": 2},
                            "faults": {"loss": 0.2, "reorder": True, "max_delay": 3,
                                       "quiescence": 600}})
    res = run_scenario(s)
    seqs = {}
    for r in res.trace:
        if r["ev"] == "execute":
            seqs.setdefault(r["node"], []).append(r["value"])
    runs = sorted(seqs.values(), key=len)
    for a, b in zip(runs, runs[1:]):
        assert b[:len(a)] == a
