"""Output actions emitted by the role state machines.

A handler never performs I/O; it returns a list of these and the driver
(simulator, test, or a real transport) carries them out in list order.
A ``Persist`` therefore always completes before any send listed after it.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Hashable, Optional, Tuple

from ..core import Message, RequestId, Value


@dataclass(frozen=True)
class Send:
    target: int
    msg: Message


@dataclass(frozen=True)
class Mcast:
    msg: Message


@dataclass(frozen=True)
class Persist:
    record: Any


@dataclass(frozen=True)
class Execute:
    instance: int
    value: Value
    requests: Tuple[RequestId, ...]


@dataclass(frozen=True)
class Decide:
    instance: int
    value: Value


@dataclass(frozen=True)
class SetTimer:
    key: Hashable
    delay: int


@dataclass(frozen=True)
class CancelTimer:
    key: Hashable


@dataclass(frozen=True)
class Notify:
    """Signal for the membership layer: ``step_down``, ``suspect`` or ``dyn_step``."""

    what: str
    detail: Optional[Tuple] = None


@dataclass(frozen=True)
class Completed:
    """A proposer got the ID_REPLY for one of its requests."""

    request: RequestId
