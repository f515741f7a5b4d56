"""Headless session client for tests, demos and scripted drives."""
from __future__ import annotations

import socket
import threading
import time
from queue import Empty, Queue

from . import wire
from .errors import NetworkError
from .params import ParameterKind
from .wire import (
    ComponentsBody,
    Hello,
    LockRelease,
    LockRequest,
    MeshDataBody,
    ParameterUpdateBody,
    Presence,
    Reject,
    Role,
)


class HeadlessClient:
    """Connects to a relay over TCP and exchanges framed wire messages."""

    def __init__(self, host: str, port: int, role: Role, timeout: float = 10.0):
        self.role = role
        try:
            self.sock = socket.create_connection((host, port), timeout=timeout)
        except OSError as exc:
            raise NetworkError(f"cannot connect to {host}:{port}: {exc}")
        self.sock.settimeout(None)
        self.sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        self.inbox: Queue = Queue()
        self.received: list = []
        self.components: ComponentsBody | None = None
        self._closed = False
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()
        self.send(Hello(role=role))

    # -- plumbing -----------------------------------------------------------

    def send(self, message) -> None:
        try:
            self.sock.sendall(wire.frame(wire.encode(message)))
        except OSError as exc:
            raise NetworkError(f"send failed: {exc}")

    def _read_loop(self) -> None:
        frames = wire.FrameReader()
        try:
            while True:
                chunk = self.sock.recv(65536)
                if not chunk:
                    return
                for payload in frames.feed(chunk):
                    message = wire.decode(payload)
                    if isinstance(message, ComponentsBody):
                        self.components = message
                    self.inbox.put(message)
        except (OSError, wire.WireError):
            return

    def next_message(self, timeout: float = 5.0):
        try:
            message = self.inbox.get(timeout=timeout)
        except Empty:
            return None
        self.received.append(message)
        return message

    def wait_for(self, cls, timeout: float = 5.0):
        """Pop messages until one of type ``cls`` arrives (or time out)."""
        deadline = time.monotonic() + timeout
        while True:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise NetworkError(f"timed out waiting for {cls.__name__}")
            message = self.next_message(timeout=remaining)
            if isinstance(message, cls):
                return message

    def close(self) -> None:
        if self._closed:
            return
        self._closed = True
        try:
            self.sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self.sock.close()

    # -- parameter addressing ---------------------------------------------------

    def resolve_parameter(self, key: str):
        """Find a shared parameter by guid or (unique) name."""
        if self.components is None:
            raise NetworkError("no Components received yet")
        for item in self.components.items:
            if item.guid == key:
                return item
        matches = [i for i in self.components.items if i.name == key]
        if len(matches) == 1:
            return matches[0]
        raise NetworkError(f"parameter {key!r} not found or ambiguous")

    def send_update(self, key: str, value) -> ParameterUpdateBody:
        descriptor = self.resolve_parameter(key)
        update = ParameterUpdateBody(guid=descriptor.guid,
                                     kind=descriptor.kind, value=value)
        self.send(update)
        return update


_WAITABLE = {
    "components": ComponentsBody,
    "mesh": MeshDataBody,
    "reject": Reject,
    "grant": wire.LockGrant,
    "deny": wire.LockDeny,
    "hostassign": wire.HostAssign,
    "hostchanged": wire.HostChanged,
}


def run_script(client: HeadlessClient, lines, out) -> int:
    """Drive a client from simple script lines; prints messages as JSON.

    Commands: ``wait <kind> [seconds]``, ``set <name-or-guid> <value>``,
    ``lock|release <name-or-guid>``, ``presence <text>``, ``sleep <seconds>``.
    Blank lines and ``#`` comments are skipped.
    """
    for raw in lines:
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        op = parts[0].lower()
        if op == "wait":
            kind = parts[1].lower()
            timeout = float(parts[2]) if len(parts) > 2 else 5.0
            cls = _WAITABLE.get(kind)
            if cls is None:
                raise NetworkError(f"unknown wait kind {kind!r}")
            message = client.wait_for(cls, timeout=timeout)
            out(wire.encode_text(message))
        elif op == "set":
            value = _parse_value(parts[2], client, parts[1])
            client.send_update(parts[1], value)
        elif op == "lock":
            descriptor = client.resolve_parameter(parts[1])
            client.send(LockRequest(descriptor.guid))
        elif op == "release":
            descriptor = client.resolve_parameter(parts[1])
            client.send(LockRelease(descriptor.guid))
        elif op == "presence":
            client.send(Presence(" ".join(parts[1:]).encode("utf-8")))
        elif op == "sleep":
            time.sleep(float(parts[1]))
        else:
            raise NetworkError(f"unknown script command {op!r}")
    return 0


def _parse_value(token: str, client: HeadlessClient, key: str):
    descriptor = client.resolve_parameter(key)
    if descriptor.kind is ParameterKind.BOOLEAN_TOGGLE:
        return token.lower() in ("true", "1", "on", "yes")
    if descriptor.kind is ParameterKind.LIST_PARAMETER:
        return int(token)
    return float(token)
