"""Session arbitration: roles, conflict strategies, rate limiting, host election.

The :class:`Session` is transport-agnostic. Inbound events arrive as method
calls (serialized by the caller: one arbiter thread or an exclusive lock);
outbound messages land in per-client sinks that a transport drains. Updates
that pass arbitration are queued for the engine via ``take_engine_updates``.

Strategies:
  * overwrite       - every designer update passes (newest wins downstream)
  * reactive-lock   - first touch locks; others are rejected until release
  * preemptive-lock - updates require a previously granted lock
  * privilege       - reactive, but higher privilege steals the lock
  * layers          - a parameter is writable only inside its layer
"""
from __future__ import annotations

import itertools
import time
from collections import deque
from dataclasses import dataclass, field
from enum import Enum

from .wire import (
    ComponentsBody,
    HostAssign,
    HostChanged,
    LockDeny,
    LockGrant,
    LockRelease,
    MeshDataBody,
    ParameterUpdateBody,
    Presence,
    Reject,
    Role,
    WireMessage,
)


class Strategy(Enum):
    OVERWRITE = "overwrite"
    REACTIVE_LOCK = "reactive-lock"
    PREEMPTIVE_LOCK = "preemptive-lock"
    PRIVILEGE = "privilege"
    LAYERS = "layers"

    @staticmethod
    def parse(text: str) -> "Strategy":
        try:
            return Strategy(text.strip().lower())
        except ValueError:
            names = ", ".join(s.value for s in Strategy)
            raise ValueError(f"unknown strategy {text!r} (choose from {names})")


class Disposition(Enum):
    ACCEPTED = "accepted"
    COALESCED = "coalesced"
    REJECTED = "rejected"


@dataclass
class UpdateResult:
    disposition: Disposition
    reason: str | None = None
    holder: int | None = None


class OutSink:
    """Per-client outbound queue; presence frames drop once it backs up."""

    def __init__(self, max_presence_depth: int):
        self.queue: deque[WireMessage] = deque()
        self.max_presence_depth = max_presence_depth

    def send(self, message: WireMessage, droppable: bool = False) -> bool:
        if droppable and len(self.queue) >= self.max_presence_depth:
            return False
        self.queue.append(message)
        return True

    def drain(self) -> list[WireMessage]:
        out = list(self.queue)
        self.queue.clear()
        return out


@dataclass
class ClientInfo:
    id: int
    role: Role
    address: str
    privilege: int
    joined_seq: int
    sink: OutSink
    presence_dropped: int = 0


@dataclass
class _LimiterSlot:
    last_accepted: float
    pending: ParameterUpdateBody | None = None


@dataclass
class SessionConfig:
    strategy: Strategy = Strategy.OVERWRITE
    min_interval_ms: float = 100.0
    max_presence_queue: int = 64
    # layers strategy wiring: parameter guid -> layer, client layers by name
    parameter_layers: dict[str, str] = field(default_factory=dict)


class Session:
    def __init__(self, config: SessionConfig | None = None,
                 clock=time.monotonic):
        self.config = config or SessionConfig()
        self.clock = clock
        self.clients: dict[int, ClientInfo] = {}
        self.locks: dict[str, int] = {}
        self.host: int | None = None
        self.client_layers: dict[int, set[str]] = {}
        self._limiter: dict[tuple[int, str], _LimiterSlot] = {}
        self._engine_updates: list[ParameterUpdateBody] = []
        self._ids = itertools.count(1)
        self._join_seq = itertools.count(1)
        self.last_components: ComponentsBody | None = None
        self.last_geometry: MeshDataBody | None = None

    # -- membership --------------------------------------------------------

    def connect(self, role: Role, address: str = "", privilege: int = 0,
                layers: set[str] | None = None) -> int:
        cid = next(self._ids)
        info = ClientInfo(
            id=cid, role=role, address=address or f"client-{cid}",
            privilege=privilege, joined_seq=next(self._join_seq),
            sink=OutSink(self.config.max_presence_queue))
        self.clients[cid] = info
        self.client_layers[cid] = set(layers or ())
        if self.host is None:
            self.host = cid
            info.sink.send(HostAssign(you=True, address=info.address))
        else:
            info.sink.send(HostAssign(
                you=False, address=self.clients[self.host].address))
        if self.last_geometry is not None:
            info.sink.send(self.last_geometry)
        if role is Role.DESIGNER and self.last_components is not None:
            info.sink.send(self.last_components)
        return cid

    def disconnect(self, cid: int) -> None:
        info = self.clients.pop(cid, None)
        if info is None:
            return
        self.client_layers.pop(cid, None)
        # pending coalesced values are flushed rather than lost
        for key in sorted(k for k in self._limiter if k[0] == cid):
            slot = self._limiter.pop(key)
            if slot.pending is not None:
                self._forward(cid, slot.pending, echo_to_sender=False)
        for guid in sorted(g for g, holder in self.locks.items() if holder == cid):
            del self.locks[guid]
            self._broadcast(LockRelease(guid))
        if self.host == cid:
            self.host = None
            if self.clients:
                new_host = min(self.clients.values(), key=lambda c: c.joined_seq)
                self.host = new_host.id
                self._broadcast(HostChanged(address=new_host.address))

    # -- parameter updates ---------------------------------------------------

    def parameter_update(self, cid: int, update: ParameterUpdateBody,
                         now: float | None = None) -> UpdateResult:
        now = self.clock() if now is None else now
        sender = self.clients.get(cid)
        if sender is None:
            return UpdateResult(Disposition.REJECTED, reason="not-connected")
        if sender.role is not Role.DESIGNER:
            sender.sink.send(Reject(update.guid, "not-designer"))
            return UpdateResult(Disposition.REJECTED, reason="not-designer")

        verdict = self._strategy_check(sender, update.guid)
        if verdict is not None:
            return verdict

        slot = self._limiter.get((cid, update.guid))
        interval = self.config.min_interval_ms / 1000.0
        if slot is not None and (slot.pending is not None
                                 or now - slot.last_accepted < interval):
            slot.pending = update
            return UpdateResult(Disposition.COALESCED)
        self._limiter[(cid, update.guid)] = _LimiterSlot(last_accepted=now)
        self._forward(cid, update)
        return UpdateResult(Disposition.ACCEPTED)

    def _strategy_check(self, sender: ClientInfo,
                        guid: str) -> UpdateResult | None:
        strategy = self.config.strategy
        if strategy is Strategy.OVERWRITE:
            return None
        if strategy is Strategy.REACTIVE_LOCK:
            holder = self.locks.get(guid)
            if holder is None:
                self.locks[guid] = sender.id
                self._broadcast(LockGrant(guid), exclude=sender.id)
                return None
            if holder == sender.id:
                return None
            return self._reject_locked(sender, guid, holder)
        if strategy is Strategy.PREEMPTIVE_LOCK:
            if self.locks.get(guid) == sender.id:
                return None
            sender.sink.send(Reject(guid, "no-grant"))
            return UpdateResult(Disposition.REJECTED, reason="no-grant")
        if strategy is Strategy.PRIVILEGE:
            holder = self.locks.get(guid)
            if holder is None:
                self.locks[guid] = sender.id
                self._broadcast(LockGrant(guid), exclude=sender.id)
                return None
            if holder == sender.id:
                return None
            if sender.privilege > self.clients[holder].privilege:
                self.locks[guid] = sender.id
                self.clients[holder].sink.send(
                    LockDeny(guid, holder=sender.address))
                return None
            return self._reject_locked(sender, guid, holder)
        # layers: parameters without a layer are open to everyone
        layer = self.config.parameter_layers.get(guid)
        if layer is None or layer in self.client_layers.get(sender.id, ()):
            return None
        sender.sink.send(Reject(guid, f"wrong-layer:{layer}"))
        return UpdateResult(Disposition.REJECTED, reason="wrong-layer")

    def _reject_locked(self, sender: ClientInfo, guid: str,
                       holder: int) -> UpdateResult:
        holder_addr = self.clients[holder].address
        sender.sink.send(Reject(guid, f"locked:{holder_addr}"))
        return UpdateResult(Disposition.REJECTED, reason="locked", holder=holder)

    def _forward(self, cid: int, update: ParameterUpdateBody,
                 echo_to_sender: bool = False) -> None:
        self._engine_updates.append(update)
        for other in self.clients.values():
            if other.role is not Role.DESIGNER:
                continue
            if other.id == cid and not echo_to_sender:
                continue
            other.sink.send(update)

    # -- limiter flushing ------------------------------------------------------

    def tick(self, now: float | None = None) -> list[ParameterUpdateBody]:
        """Flush deferred updates whose rate-limit interval has elapsed."""
        now = self.clock() if now is None else now
        interval = self.config.min_interval_ms / 1000.0
        flushed = []
        for key in sorted(self._limiter):
            slot = self._limiter[key]
            if slot.pending is not None and now - slot.last_accepted >= interval:
                update = slot.pending
                slot.pending = None
                slot.last_accepted = now
                self._forward(key[0], update)
                flushed.append(update)
        return flushed

    def next_flush_due(self) -> float | None:
        """Earliest absolute time a pending update becomes flushable."""
        interval = self.config.min_interval_ms / 1000.0
        due = [slot.last_accepted + interval
               for slot in self._limiter.values() if slot.pending is not None]
        return min(due) if due else None

    # -- locks -------------------------------------------------------------------

    def lock_request(self, cid: int, guid: str) -> bool:
        sender = self.clients.get(cid)
        if sender is None or sender.role is not Role.DESIGNER:
            if sender is not None:
                sender.sink.send(LockDeny(guid, holder=""))
            return False
        holder = self.locks.get(guid)
        if holder is None or holder == cid:
            self.locks[guid] = cid
            sender.sink.send(LockGrant(guid))
            self._broadcast(LockGrant(guid), exclude=cid)
            return True
        if self.config.strategy is Strategy.PRIVILEGE and \
                sender.privilege > self.clients[holder].privilege:
            self.locks[guid] = cid
            sender.sink.send(LockGrant(guid))
            self.clients[holder].sink.send(LockDeny(guid, holder=sender.address))
            return True
        sender.sink.send(LockDeny(guid, holder=self.clients[holder].address))
        return False

    def lock_release(self, cid: int, guid: str) -> None:
        if self.locks.get(guid) == cid:
            del self.locks[guid]
            self._broadcast(LockRelease(guid))

    # -- fan-out -------------------------------------------------------------------

    def broadcast_geometry(self, geometry: MeshDataBody) -> None:
        self.last_geometry = geometry
        self._broadcast(geometry)

    def publish_components(self, components: ComponentsBody) -> None:
        self.last_components = components
        for client in self.clients.values():
            if client.role is Role.DESIGNER:
                client.sink.send(components)

    def forward_presence(self, cid: int, presence: Presence) -> None:
        for other in self.clients.values():
            if other.id == cid:
                continue
            if not other.sink.send(presence, droppable=True):
                other.presence_dropped += 1

    def _broadcast(self, message: WireMessage, exclude: int | None = None) -> None:
        for client in self.clients.values():
            if client.id != exclude:
                client.sink.send(message)

    # -- transport hooks --------------------------------------------------------------

    def take_engine_updates(self) -> list[ParameterUpdateBody]:
        out, self._engine_updates = self._engine_updates, []
        return out

    def take_outbox(self, cid: int) -> list[WireMessage]:
        info = self.clients.get(cid)
        return info.sink.drain() if info else []
