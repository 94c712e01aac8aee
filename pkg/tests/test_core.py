import pytest
from hypothesis import given, strategies as st

from htring.core import (OVERHEAD_BYTES, Batch, BatchId, ClientState, Kind, Message,
                         Multicast, Request, RequestId, Round, Unicast, clubbed_size,
                         encoded_size, fresh_request_id, parse_round, parse_value, round_key)

ids = st.builds(RequestId, st.integers(0, 50), st.integers(0, 50))


def test_fresh_request_id_examples():
    c = ClientState(7)
    assert fresh_request_id(c) == RequestId(7, 1)
    assert fresh_request_id(c) == RequestId(7, 2)
    a, b = ClientState(3), ClientState(4)
    assert fresh_request_id(a) != fresh_request_id(b)


@given(ids, ids, ids)
def test_request_id_total_order(a, b, c):
    assert not a < a
    assert (a < b) + (b < a) + (a == b) == 1
    if a < b and b < c:
        assert a < c


@given(st.lists(st.integers(1, 100), min_size=1, max_size=200))
def test_client_ids_never_repeat(counts):
    seen = set()
    clients = [ClientState(k) for k in range(len(counts))]
    for k, n in enumerate(counts[:5]):
        for _ in range(n):
            rid = fresh_request_id(clients[k])
            assert rid not in seen
            seen.add(rid)


def test_encoded_size_examples():
    two_a = Message(Kind.PHASE2A, 1, Unicast(2), 1, Round(1, 1), RequestId(1, 1))
    assert encoded_size(two_a) == 128
    r = Request(RequestId(1, 1), bytes(1024))
    assert encoded_size(Message(Kind.REQUEST, 1, Multicast(0), payload=r)) == 1152
    assert encoded_size(Message(Kind.LEARNED, 1, Multicast(0), 3, value=RequestId(1, 1))) == 128


@pytest.mark.parametrize("kind", [k for k in Kind if k is not Kind.REQUEST])
def test_payloadless_kinds_cost_overhead_only(kind):
    sn = 1 if kind is Kind.PHASE2A2B else None
    assert encoded_size(Message(kind, 1, Unicast(2), 1, sn=sn)) == OVERHEAD_BYTES


@given(st.lists(st.integers(0, 5000), min_size=2, max_size=10))
def test_clubbing_is_cheaper_than_separate_frames(sizes):
    msgs = [Message(Kind.REQUEST, 1, Multicast(0), payload=Request(RequestId(1, k), bytes(s)))
            for k, s in enumerate(sizes)]
    club = clubbed_size(msgs)
    assert club == OVERHEAD_BYTES + sum(sizes)
    assert club < sum(encoded_size(m) for m in msgs)


def test_message_shape_rules():
    with pytest.raises(ValueError):
        Message(Kind.PHASE2A2B, 1, Unicast(2), 1, Round(1, 1))
    with pytest.raises(ValueError):
        Message(Kind.PHASE2A, 1, Unicast(2), 1, Round(1, 1), sn=0)
    with pytest.raises(ValueError):
        Message(Kind.LEARNED, 1, Multicast(0), 1, payload=Request(RequestId(1, 1)))


def test_canonical_field_order():
    m = Message(Kind.PHASE2A2B, 3, Unicast(4), 9, Round(2, 1), RequestId(5, 6), sn=1)
    d = m.canonical()
    assert list(d) == ["kind", "sender", "transport", "instance", "round", "sn", "value",
                       "payload_size"]
    assert d["transport"] == "u:4" and d["round"] == "2.1" and d["value"] == "r:5.6"


def test_batch_rules():
    with pytest.raises(ValueError):
        Batch(BatchId(1, 1), ())
    b = Batch(BatchId(1, 1), (Request(RequestId(1, 1), b"ab"), Request(RequestId(2, 1), b"c")))
    assert b.size == 3 and b.member_ids == (RequestId(1, 1), RequestId(2, 1))


@given(st.one_of(ids, st.builds(BatchId, st.integers(0, 9), st.integers(0, 10**9)), st.none()))
def test_value_text_roundtrip(v):
    assert parse_value(None if v is None else str(v)) == v


def test_round_order_and_null():
    assert round_key(None) < round_key(Round(0, 0))
    assert Round(1, 5) < Round(2, 1)
    assert parse_round("3.2") == Round(3, 2)
