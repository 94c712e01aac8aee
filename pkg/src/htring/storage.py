"""Per-node stable storage.

Records are keyed by ``(kind, key)``, where the key is the instance number
(none for the election record, the value id for a payload record); the
latest completed write wins.
Two backends share the record schema: an in-memory store (the default in
simulation, survives simulated crashes because the simulator never discards
it) and an append-only file of length-prefixed JSON records.

File layout: each entry is a 4-byte big-endian unsigned length followed by
that many bytes of UTF-8 JSON ``{"seq", "kind", "instance", "fields"}``.
A truncated tail entry (torn write) is ignored on replay.
"""
from __future__ import annotations

import base64
import json
import os
import struct
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple, Union

from .core import (Batch, BatchId, Request, Round, Value, parse_round, parse_value,
                   value_str)

COORDINATOR = "coordinator_instance"
ACCEPTOR = "acceptor_instance"
ELECTION = "election"
PAYLOAD = "payload"


@dataclass(frozen=True)
class CoordinatorRecord:
    instance: int
    crnd: Round
    cval: Value

    kind = COORDINATOR

    @property
    def key(self):
        return self.instance

    def fields(self):
        return {"crnd": str(self.crnd), "cval": value_str(self.cval)}


@dataclass(frozen=True)
class AcceptorRecord:
    instance: int
    rnd: Optional[Round]
    vrnd: Optional[Round]
    vval: Value
    sn: int

    kind = ACCEPTOR

    @property
    def key(self):
        return self.instance

    def fields(self):
        return {
            "rnd": None if self.rnd is None else str(self.rnd),
            "vrnd": None if self.vrnd is None else str(self.vrnd),
            "vval": value_str(self.vval),
            "sn": self.sn,
        }


@dataclass(frozen=True)
class ElectionRecord:
    leader: bool
    I: int
    lsn: Optional[Round]

    kind = ELECTION
    instance = None
    key = None

    def fields(self):
        return {"leader": self.leader, "I": self.I,
                "lsn": None if self.lsn is None else str(self.lsn)}


@dataclass(frozen=True)
class PayloadRecord:
    """A request or batch an acceptor holds durably, so it can still serve
    the payload of any value it accepted after a restart."""

    payload: Union[Request, Batch]

    kind = PAYLOAD
    instance = None

    @property
    def key(self):
        return str(self.payload.id)

    def fields(self, compact: bool = False):
        p = self.payload
        members = p.members if isinstance(p, Batch) else (p,)
        if compact:
            data = [{"id": str(r.id), "size": r.size} for r in members]
        else:
            data = [{"id": str(r.id), "data": base64.b64encode(r.payload).decode()}
                    for r in members]
        return {"id": str(p.id), "requests": data}


def record_to_dict(rec, compact: bool = False) -> dict:
    """``compact`` drops payload bytes; traces use it, files never do."""
    fields = rec.fields(compact) if rec.kind == PAYLOAD else rec.fields()
    return {"kind": rec.kind, "instance": rec.instance, "fields": fields}


def _payload_from_fields(f: dict):
    reqs = tuple(Request(parse_value(r["id"]), base64.b64decode(r["data"]))
                 for r in f["requests"])
    pid = parse_value(f["id"])
    return Batch(pid, reqs) if isinstance(pid, BatchId) else reqs[0]


def record_from_dict(d: dict):
    f = d["fields"]
    if d["kind"] == COORDINATOR:
        return CoordinatorRecord(d["instance"], parse_round(f["crnd"]), parse_value(f["cval"]))
    if d["kind"] == ACCEPTOR:
        return AcceptorRecord(d["instance"], parse_round(f["rnd"]), parse_round(f["vrnd"]),
                              parse_value(f["vval"]), f["sn"])
    if d["kind"] == ELECTION:
        return ElectionRecord(f["leader"], f["I"], parse_round(f["lsn"]))
    if d["kind"] == PAYLOAD:
        return PayloadRecord(_payload_from_fields(f))
    raise ValueError(f"unknown record kind {d['kind']!r}")


class MemoryStore:
    """Stable storage held in memory; the simulator keeps it across crashes."""

    def __init__(self, node: int):
        self.node = node
        self.seq = 0
        self._records: Dict[Tuple[str, object], object] = {}

    def persist(self, record) -> int:
        self.seq += 1
        self._records[(record.kind, record.key)] = record
        return self.seq

    def recover(self) -> List[object]:
        return [self._records[k] for k in sorted(self._records, key=_key_order)]

    def get(self, kind, key=None):
        return self._records.get((kind, key))

    def max_instance(self) -> int:
        return max((i for (k, i) in self._records if k in (COORDINATOR, ACCEPTOR)), default=0)


def _key_order(k):
    # keys only ever compare within one kind, where they share a type
    kind, key = k
    return (kind, -1 if key is None else key)


class FileStore(MemoryStore):
    """Append-only file backend; every persist is a single framed append."""

    _HDR = struct.Struct(">I")

    def __init__(self, node: int, path: str, fsync: bool = False):
        super().__init__(node)
        self.path = path
        self.fsync = fsync
        if os.path.exists(path):
            self._replay()

    def _replay(self):
        with open(self.path, "rb") as fh:
            data = fh.read()
        pos = 0
        while pos + self._HDR.size <= len(data):
            (n,) = self._HDR.unpack_from(data, pos)
            body = data[pos + self._HDR.size: pos + self._HDR.size + n]
            if len(body) < n:
                break
            d = json.loads(body.decode())
            rec = record_from_dict(d)
            self._records[(rec.kind, rec.key)] = rec
            self.seq = d["seq"]
            pos += self._HDR.size + n

    def persist(self, record) -> int:
        seq = self.seq + 1
        d = {"seq": seq, **record_to_dict(record)}
        body = json.dumps(d, separators=(",", ":")).encode()
        with open(self.path, "ab") as fh:
            fh.write(self._HDR.pack(len(body)) + body)
            if self.fsync:
                fh.flush()
                os.fsync(fh.fileno())
        return super().persist(record)

    def recover(self) -> List[object]:
        self._records.clear()
        self.seq = 0
        if os.path.exists(self.path):
            self._replay()
        return super().recover()
