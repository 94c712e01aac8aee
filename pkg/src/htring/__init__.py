"""HT-Ring Paxos: ring-ordered Paxos on request ids with LAN-multicast dissemination,
run inside a seeded discrete-event simulator."""
from .core import (OVERHEAD_BYTES, Batch, BatchId, Kind, Message, Multicast, Request,
                   RequestId, Round, Unicast, encoded_size)
from .protocol import ProtocolConfig, Proposer, Site

__version__ = "0.1.0"
