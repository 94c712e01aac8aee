"""Value types and wire messages shared by every role.

Consensus runs on ids (``RequestId`` or ``BatchId``), never on payloads.
Every wire message costs a flat ``OVERHEAD_BYTES`` plus whatever request
payload it carries.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Tuple, Union

OVERHEAD_BYTES = 128


@dataclass(frozen=True, order=True)
class RequestId:
    client_id: int
    client_seq: int

    def __str__(self):
        return f"r:{self.client_id}.{self.client_seq}"


@dataclass(frozen=True, order=True)
class BatchId:
    broadcaster: int
    batch_seq: int

    def __str__(self):
        return f"b:{self.broadcaster}.{self.batch_seq}"


Value = Optional[Union[RequestId, BatchId]]


@dataclass(frozen=True, order=True)
class Round:
    """A leader sequence number tagged with the node that was elected with it."""

    number: int
    leader: int

    def __str__(self):
        return f"{self.number}.{self.leader}"


def round_key(rnd: Optional[Round]) -> Tuple[int, int]:
    # null rounds sort below every concrete round
    if rnd is None:
        return (-1, -1)
    return (rnd.number, rnd.leader)


def value_str(v: Value) -> Optional[str]:
    return None if v is None else str(v)


def parse_value(s: Optional[str]) -> Value:
    if s is None:
        return None
    tag, rest = s.split(":", 1)
    a, b = rest.split(".")
    if tag == "r":
        return RequestId(int(a), int(b))
    if tag == "b":
        return BatchId(int(a), int(b))
    raise ValueError(f"bad value literal {s!r}")


def parse_round(s: Optional[str]) -> Optional[Round]:
    if s is None:
        return None
    a, b = s.split(".")
    return Round(int(a), int(b))


@dataclass(frozen=True)
class Request:
    id: RequestId
    payload: bytes = b""
    origin_coordinator: Optional[int] = None

    @property
    def size(self) -> int:
        return len(self.payload)


@dataclass(frozen=True)
class Batch:
    batch_id: BatchId
    members: Tuple[Request, ...]

    def __post_init__(self):
        if not self.members:
            raise ValueError("a batch needs at least one request")

    @property
    def id(self) -> BatchId:
        return self.batch_id

    @property
    def size(self) -> int:
        return sum(r.size for r in self.members)

    @property
    def member_ids(self) -> Tuple[RequestId, ...]:
        return tuple(r.id for r in self.members)


class Kind(str, enum.Enum):
    REQUEST = "REQUEST"
    PHASE1A = "PHASE1A"
    PHASE1B = "PHASE1B"
    PHASE2A = "PHASE2A"
    PHASE2A2B = "PHASE2A2B"
    PHASE2B = "PHASE2B"
    LEARNED = "LEARNED"
    DENIAL = "DENIAL"
    ID_QUERY = "ID_QUERY"
    ID_REPLY = "ID_REPLY"
    ACK = "ACK"


# kinds that belong to ordering rather than dissemination or client traffic
ORDERING_KINDS = frozenset(
    {Kind.PHASE1A, Kind.PHASE1B, Kind.PHASE2A, Kind.PHASE2A2B, Kind.PHASE2B,
     Kind.LEARNED, Kind.DENIAL, Kind.ACK}
)


@dataclass(frozen=True)
class Unicast:
    target: int

    def __str__(self):
        return f"u:{self.target}"


@dataclass(frozen=True)
class Multicast:
    lan: int

    def __str__(self):
        return f"m:{self.lan}"


Transport = Union[Unicast, Multicast]


@dataclass(frozen=True)
class Message:
    kind: Kind
    sender: int
    transport: Transport
    instance: Optional[int] = None
    round: Optional[Round] = None
    value: Value = None
    sn: Optional[int] = None
    payload: Optional[Union[Request, Batch]] = None
    # PHASE1B carries the acceptor's accepted round and value alongside rnd
    vrnd: Optional[Round] = None
    vval: Value = None

    def __post_init__(self):
        if self.kind is Kind.PHASE2A2B and self.sn is None:
            raise ValueError("PHASE2A2B must carry sn")
        if self.kind is Kind.PHASE2A and self.sn is not None:
            raise ValueError("PHASE2A carries no sn")
        if self.kind is Kind.LEARNED and self.payload is not None:
            raise ValueError("LEARNED never carries a payload")

    @property
    def payload_size(self) -> int:
        return 0 if self.payload is None else self.payload.size

    def canonical(self) -> dict:
        """Trace form; key order is part of the trace format."""
        d = {
            "kind": self.kind.value,
            "sender": self.sender,
            "transport": str(self.transport),
            "instance": self.instance,
            "round": None if self.round is None else str(self.round),
            "sn": self.sn,
            "value": value_str(self.value),
            "payload_size": self.payload_size,
        }
        if self.kind is Kind.PHASE1B:
            d["vrnd"] = None if self.vrnd is None else str(self.vrnd)
            d["vval"] = value_str(self.vval)
        return d


def encoded_size(message: Message) -> int:
    return OVERHEAD_BYTES + message.payload_size


def clubbed_size(messages) -> int:
    """Size of several messages sent as one multicast frame."""
    return OVERHEAD_BYTES + sum(m.payload_size for m in messages)


@dataclass
class ClientState:
    client_id: int
    last_seq: int = 0


def fresh_request_id(client: ClientState) -> RequestId:
    client.last_seq += 1
    return RequestId(client.client_id, client.last_seq)
