"""Range-gated wireless channel standing in for a full PHY/MAC stack.

Propagation is a unit disk around the sender: every node within the sender's
transmit range at send time is a candidate receiver. Each candidate copy then
survives an independent Bernoulli loss draw taken from the channel's own seeded
stream, and is handed to the ``receive_data`` hook after a fixed latency counted
in whole highway steps.

The channel log holds one SEND line per candidate copy and exactly one DELIVER
or DROP line per SEND, so ``sends == deliveries + drops``. A broadcast that finds
nobody in range is logged as a SEND/DROP pair with receiver ``*``.
"""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass
from typing import List, NamedTuple, Optional

logger = logging.getLogger(__name__)

BROADCAST = None
DEFAULT_RANGE = 250.0


class RadioError(ValueError):
    pass


@dataclass
class RadioParams:
    """Per-node radio settings. ``address`` equals the owning vehicle id."""

    address: int = 0
    transmit_range: float = DEFAULT_RANGE
    enabled: bool = True

    def __post_init__(self):
        if self.transmit_range < 0:
            raise ValueError("transmit_range must be >= 0")


@dataclass(frozen=True)
class Message:
    sender: int
    destination: Optional[int]  # None means broadcast
    payload: bytes
    send_time: float

    @property
    def is_broadcast(self) -> bool:
        return self.destination is None


@dataclass
class ChannelModel:
    latency_steps: int = 0
    loss_probability: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.latency_steps < 0:
            raise ValueError("latency_steps must be >= 0")
        if not 0.0 <= self.loss_probability <= 1.0:
            raise ValueError("loss_probability must be in [0, 1]")


class LogEntry(NamedTuple):
    time: float
    event: str  # SEND | DELIVER | DROP
    sender: int
    receiver: Optional[int]  # None for a broadcast with no receiver in range
    nbytes: int
    reason: str = ""

    def format(self) -> str:
        receiver = "*" if self.receiver is None else str(self.receiver)
        return f"{self.time:.6f} {self.event} {self.sender} {receiver} {self.nbytes}"


class _Copy(NamedTuple):
    due_step: int
    send_time: float
    sender: int
    receiver: Optional[int]
    seq: int
    message: Message
    in_range: bool


def distance(p, q) -> float:
    return math.sqrt((p[0] - q[0]) ** 2 + (p[1] - q[1]) ** 2 + (p[2] - q[2]) ** 2)


class Channel:
    """Message queue, delivery and event log for one highway.

    The owning highway keeps ``now`` and ``step_index`` current and calls
    :meth:`deliver_pending` once per step after the mobility update.
    """

    def __init__(self, model: Optional[ChannelModel] = None):
        self.model = model or ChannelModel()
        self.rng = random.Random(f"channel:{self.model.seed}")
        self.highway = None
        self.now = 0.0
        self.step_index = 0
        self.log: List[LogEntry] = []
        self._queue: List[_Copy] = []
        self._seq = 0
        self._delivering = False

    def bind(self, highway) -> None:
        self.highway = highway

    # -- sending ----------------------------------------------------------
    def _check_sender(self, sender) -> None:
        radio = getattr(sender, "radio", None)
        if radio is None or not radio.enabled:
            raise RadioError(f"vehicle {sender.vehicle_id} has no enabled radio")

    def _due_step(self) -> int:
        # copies submitted from inside a delivery pass go out with the next pass
        return self.step_index + self.model.latency_steps + (1 if self._delivering else 0)

    def _enqueue(self, message: Message, receiver: Optional[int], in_range: bool) -> None:
        copy = _Copy(self._due_step(), message.send_time, message.sender, receiver,
                     self._seq, message, in_range)
        self._seq += 1
        self._queue.append(copy)
        self.log.append(LogEntry(message.send_time, "SEND", message.sender, receiver, len(message.payload)))

    def broadcast(self, sender, payload: bytes) -> Message:
        """Send ``payload`` to every node within the sender's range."""
        self._check_sender(sender)
        payload = bytes(payload)
        message = Message(sender.radio.address, BROADCAST, payload, self.now)
        origin = self.highway.global_position(sender)
        reach = sender.radio.transmit_range
        receivers = []
        for node in self.highway.all_entities():
            if node is sender or node.radio is None or not node.radio.enabled:
                continue
            if distance(origin, self.highway.global_position(node)) <= reach:
                receivers.append(node.radio.address)
        if not receivers:
            self._enqueue(message, None, False)
        for address in sorted(receivers):
            self._enqueue(message, address, True)
        return message

    def unicast(self, sender, dest_address: int, payload: bytes) -> Message:
        """Send ``payload`` to one address; out-of-range or unknown targets are dropped."""
        self._check_sender(sender)
        if dest_address == sender.radio.address:
            raise RadioError("no self-delivery: destination equals sender address")
        payload = bytes(payload)
        message = Message(sender.radio.address, dest_address, payload, self.now)
        dest = self.highway.find_vehicle(dest_address)
        in_range = (dest is not None and dest.radio is not None and dest.radio.enabled
                    and distance(self.highway.global_position(sender),
                                 self.highway.global_position(dest)) <= sender.radio.transmit_range)
        self._enqueue(message, dest_address, in_range)
        return message

    # -- delivery ---------------------------------------------------------
    def deliver_pending(self, highway) -> int:
        """Dispatch every copy whose delivery step has arrived; returns the delivery count."""
        due = [c for c in self._queue if c.due_step <= self.step_index]
        if not due:
            return 0
        self._queue = [c for c in self._queue if c.due_step > self.step_index]
        due.sort(key=lambda c: (c.send_time, c.sender, -1 if c.receiver is None else c.receiver, c.seq))
        hook = highway.hooks.receive_data
        delivered = 0
        self._delivering = True
        try:
            for copy in due:
                nbytes = len(copy.message.payload)
                if copy.receiver is None:
                    self._log_drop(copy, nbytes, "no receiver in range")
                    continue
                receiver = highway.find_vehicle(copy.receiver)
                if receiver is None:
                    self._log_drop(copy, nbytes, "unknown or exited destination")
                    continue
                if not copy.in_range:
                    self._log_drop(copy, nbytes, "out of range")
                    continue
                loss = self.model.loss_probability
                if loss > 0.0 and self.rng.random() < loss:
                    self._log_drop(copy, nbytes, "lost")
                    continue
                self.log.append(LogEntry(self.now, "DELIVER", copy.sender, copy.receiver, nbytes))
                delivered += 1
                if hook is not None:
                    hook(receiver, copy.message.payload, copy.sender)
        finally:
            self._delivering = False
        return delivered

    def _log_drop(self, copy: _Copy, nbytes: int, reason: str) -> None:
        logger.debug("drop %s -> %s at t=%.3f: %s", copy.sender, copy.receiver, self.now, reason)
        self.log.append(LogEntry(self.now, "DROP", copy.sender, copy.receiver, nbytes, reason))

    # -- bookkeeping ------------------------------------------------------
    def counts(self) -> dict:
        out = {"SEND": 0, "DELIVER": 0, "DROP": 0}
        for entry in self.log:
            out[entry.event] += 1
        return out

    def pending(self) -> int:
        return len(self._queue)

    def export(self) -> str:
        """Channel log as space-delimited text: time event sender receiver bytes."""
        return "".join(entry.format() + "\n" for entry in self.log)

    def _checkpoint(self):
        return (self.rng.getstate(), len(self.log), list(self._queue), self._seq, self.now, self.step_index)

    def _rollback(self, state) -> None:
        rng_state, log_len, queue, seq, now, step_index = state
        self.rng.setstate(rng_state)
        del self.log[log_len:]
        self._queue = queue
        self._seq = seq
        self.now = now
        self.step_index = step_index
        self._delivering = False
