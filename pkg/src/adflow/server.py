"""Socket transports wiring an evaluation engine to a relay session.

One arbiter thread owns the session (network readers only enqueue events);
one evaluation thread owns the engine. Clients connect over plain TCP with
length-framed messages, or over a WebSocket listener carrying the same
framed bytes for browsers (which can also serve the static client page).
"""
from __future__ import annotations

import base64
import hashlib
import logging
import queue
import socket
import threading
from dataclasses import dataclass

from . import wire
from .dataflow import EvaluationEngine
from .relay import Session, SessionConfig
from .wire import (
    ComponentsBody,
    FrameReader,
    Hello,
    LockRelease,
    LockRequest,
    MeshDataBody,
    ParameterUpdateBody,
    Presence,
)

log = logging.getLogger(__name__)

_WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"


class _Writer:
    """Per-connection outbound queue drained by its own thread."""

    def __init__(self, send_bytes, max_droppable_depth: int = 64):
        self._send_bytes = send_bytes
        self._lock = threading.Lock()
        self._cond = threading.Condition(self._lock)
        self._queue: list[bytes] = []
        self._closed = False
        self.max_droppable_depth = max_droppable_depth
        self.dropped = 0
        self.thread = threading.Thread(target=self._run, daemon=True)
        self.thread.start()

    def send(self, data: bytes, droppable: bool = False) -> None:
        with self._cond:
            if self._closed:
                return
            if droppable and len(self._queue) >= self.max_droppable_depth:
                self.dropped += 1
                return
            self._queue.append(data)
            self._cond.notify()

    def close(self) -> None:
        with self._cond:
            self._closed = True
            self._cond.notify()

    def _run(self) -> None:
        while True:
            with self._cond:
                while not self._queue and not self._closed:
                    self._cond.wait()
                if self._closed and not self._queue:
                    return
                batch, self._queue = self._queue, []
            try:
                for chunk in batch:
                    self._send_bytes(chunk)
            except OSError:
                with self._cond:
                    self._closed = True
                return


@dataclass
class _Conn:
    sock: socket.socket
    address: str
    writer: _Writer
    is_websocket: bool = False
    cid: int | None = None

    def send_message(self, message, droppable: bool = False) -> None:
        framed = wire.frame(wire.encode(message))
        if self.is_websocket:
            framed = _ws_wrap_binary(framed)
        self.writer.send(framed, droppable=droppable)

    def close(self) -> None:
        self.writer.close()
        try:
            self.sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self.sock.close()


def _ws_wrap_binary(payload: bytes) -> bytes:
    header = bytearray([0x82])  # FIN + binary opcode
    n = len(payload)
    if n < 126:
        header.append(n)
    elif n < (1 << 16):
        header.append(126)
        header += n.to_bytes(2, "big")
    else:
        header.append(127)
        header += n.to_bytes(8, "big")
    return bytes(header) + payload


def parse_bind(text: str) -> tuple[str, int]:
    host, _, port = text.rpartition(":")
    if not host or not port:
        raise ValueError(f"bind address {text!r} needs host:port")
    return host, int(port)


class RelayServer:
    """Runs the full loop: receive updates, re-solve, re-broadcast."""

    def __init__(self, engine: EvaluationEngine,
                 config: SessionConfig | None = None,
                 bind: tuple[str, int] = ("127.0.0.1", 0),
                 ws_bind: tuple[str, int] | None = None,
                 web_root: str | None = None,
                 definition_id: str = "definition",
                 geo_anchor=None):
        self.engine = engine
        self.session = Session(config)
        self.bind = bind
        self.ws_bind = ws_bind
        self.web_root = web_root
        self.definition_id = definition_id
        self.geo_anchor = geo_anchor
        self._events: queue.Queue = queue.Queue()
        self._conns: dict[int, _Conn] = {}
        self._eval_wakeup = threading.Event()
        self._running = False
        self._threads: list[threading.Thread] = []
        self._listener: socket.socket | None = None
        self._ws_listener: socket.socket | None = None
        self.port: int | None = None
        self.ws_port: int | None = None

    # -- lifecycle ---------------------------------------------------------

    def start(self) -> None:
        self._running = True
        result = self.engine.solve()
        self.session.publish_components(self._components_body())
        self.session.broadcast_geometry(self._mesh_body(result))

        self._listener = socket.create_server(self.bind)
        self.port = self._listener.getsockname()[1]
        self._spawn(self._accept_loop, self._listener, False)
        if self.ws_bind is not None:
            self._ws_listener = socket.create_server(self.ws_bind)
            self.ws_port = self._ws_listener.getsockname()[1]
            self._spawn(self._accept_loop, self._ws_listener, True)
        self._spawn(self._arbiter_loop)
        self._spawn(self._eval_loop)

    def stop(self) -> None:
        self._running = False
        self._events.put(("stop",))
        self._eval_wakeup.set()
        for listener in (self._listener, self._ws_listener):
            if listener is not None:
                listener.close()
        for conn in list(self._conns.values()):
            conn.close()
        for thread in self._threads:
            thread.join(timeout=2.0)

    def _spawn(self, fn, *args) -> None:
        thread = threading.Thread(target=fn, args=args, daemon=True)
        thread.start()
        self._threads.append(thread)

    # -- snapshots -----------------------------------------------------------

    def _components_body(self) -> ComponentsBody:
        return ComponentsBody(
            [wire.narrow_descriptor(d) for d in self.engine.parameters()])

    def _mesh_body(self, result) -> MeshDataBody:
        return MeshDataBody(guid=self.definition_id, meshes=result.meshes,
                            geo=self.geo_anchor)

    # -- accept/read -----------------------------------------------------------

    def _accept_loop(self, listener: socket.socket, is_ws: bool) -> None:
        listener.settimeout(0.25)  # closing a listener does not wake accept()
        while self._running:
            try:
                sock, addr = listener.accept()
            except socket.timeout:
                continue
            except OSError:
                return
            sock.settimeout(None)  # accepted sockets inherit the poll timeout
            sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
            address = f"{addr[0]}:{addr[1]}"
            conn = _Conn(sock=sock, address=address,
                         writer=_Writer(sock.sendall), is_websocket=is_ws)
            self._spawn(self._read_loop, conn)

    def _read_loop(self, conn: _Conn) -> None:
        try:
            if conn.is_websocket and not self._ws_handshake(conn):
                conn.close()
                return
            frames = FrameReader()
            if conn.is_websocket:
                def send_pong(payload: bytes, _conn=conn) -> None:
                    _conn.writer.send(bytes([0x8A, len(payload)]) + payload)

                reader = _ws_reader(conn.sock, send_pong)
            else:
                reader = _tcp_reader(conn.sock)
            for chunk in reader:
                for payload in frames.feed(chunk):
                    try:
                        message = wire.decode(payload)
                    except wire.WireError as exc:
                        log.warning("%s: undecodable frame: %s", conn.address, exc)
                        continue
                    self._events.put(("message", conn, message))
        except (OSError, wire.WireError) as exc:
            log.debug("%s: connection error: %s", conn.address, exc)
        finally:
            self._events.put(("bye", conn))

    def _ws_handshake(self, conn: _Conn) -> bool:
        data = b""
        while b"\r\n\r\n" not in data:
            chunk = conn.sock.recv(4096)
            if not chunk:
                return False
            data += chunk
            if len(data) > 65536:
                return False
        head, _, rest = data.partition(b"\r\n\r\n")
        lines = head.decode("latin-1").split("\r\n")
        request = lines[0].split()
        headers = {}
        for line in lines[1:]:
            key, _, value = line.partition(":")
            headers[key.strip().lower()] = value.strip()
        if headers.get("upgrade", "").lower() != "websocket":
            self._serve_static(conn, request)
            return False
        key = headers.get("sec-websocket-key", "")
        accept = base64.b64encode(
            hashlib.sha1((key + _WS_GUID).encode()).digest()).decode()
        conn.sock.sendall(
            b"HTTP/1.1 101 Switching Protocols\r\n"
            b"Upgrade: websocket\r\nConnection: Upgrade\r\n"
            b"Sec-WebSocket-Accept: " + accept.encode() + b"\r\n\r\n")
        if rest:
            # bytes that arrived behind the handshake belong to the stream
            conn.sock = _PushbackSocket(conn.sock, rest)
        return True

    def _serve_static(self, conn: _Conn, request: list[str]) -> None:
        if self.web_root is None or len(request) < 2 or request[0] != "GET":
            conn.sock.sendall(b"HTTP/1.1 404 Not Found\r\n\r\n")
            return
        import os

        path = request[1].split("?")[0].lstrip("/") or "index.html"
        full = os.path.realpath(os.path.join(self.web_root, path))
        root = os.path.realpath(self.web_root)
        if not full.startswith(root + os.sep) and full != root:
            conn.sock.sendall(b"HTTP/1.1 404 Not Found\r\n\r\n")
            return
        if not os.path.isfile(full):
            conn.sock.sendall(b"HTTP/1.1 404 Not Found\r\n\r\n")
            return
        ctype = "text/html" if full.endswith(".html") else \
            "text/javascript" if full.endswith(".js") else \
            "application/octet-stream"
        with open(full, "rb") as fh:
            body = fh.read()
        conn.sock.sendall(
            f"HTTP/1.1 200 OK\r\nContent-Type: {ctype}\r\n"
            f"Content-Length: {len(body)}\r\n\r\n".encode() + body)

    # -- arbiter ------------------------------------------------------------------

    def _arbiter_loop(self) -> None:
        while True:
            due = self.session.next_flush_due()
            timeout = 0.05
            if due is not None:
                timeout = min(timeout, max(0.0, due - self.session.clock()))
            try:
                event = self._events.get(timeout=timeout)
            except queue.Empty:
                self.session.tick()
                self._pump()
                continue
            kind = event[0]
            if kind == "stop":
                return
            if kind == "message":
                self._on_message(event[1], event[2])
            elif kind == "geometry":
                self.session.broadcast_geometry(event[1])
            elif kind == "snapshot":
                # refresh what late joiners receive; no rebroadcast
                self.session.last_components = event[1]
            elif kind == "bye":
                conn = event[1]
                if conn.cid is not None:
                    self.session.disconnect(conn.cid)
                    self._conns.pop(conn.cid, None)
                    conn.cid = None
                conn.close()
            self.session.tick()
            self._pump()

    def _on_message(self, conn: _Conn, message) -> None:
        if conn.cid is None:
            if isinstance(message, Hello):
                cid = self.session.connect(message.role, conn.address)
                conn.cid = cid
                self._conns[cid] = conn
            else:
                log.warning("%s: first message must be Hello", conn.address)
            return
        cid = conn.cid
        if isinstance(message, ParameterUpdateBody):
            self.session.parameter_update(cid, message)
        elif isinstance(message, LockRequest):
            self.session.lock_request(cid, message.guid)
        elif isinstance(message, LockRelease):
            self.session.lock_release(cid, message.guid)
        elif isinstance(message, Presence):
            self.session.forward_presence(cid, message)
        else:
            log.debug("%s: ignoring %s", conn.address, type(message).__name__)

    def _pump(self) -> None:
        updates = self.session.take_engine_updates()
        for update in updates:
            self.engine.enqueue_update(update.guid, update.value)
        if updates:
            self._eval_wakeup.set()
        for cid, conn in list(self._conns.items()):
            for message in self.session.take_outbox(cid):
                droppable = isinstance(message, Presence)
                conn.send_message(message, droppable=droppable)

    # -- evaluation ------------------------------------------------------------------

    def _eval_loop(self) -> None:
        while self._running:
            self._eval_wakeup.wait(timeout=0.05)
            self._eval_wakeup.clear()
            if not self._running:
                return
            applied = self.engine.drain()
            if not applied:
                continue
            result = self.engine.solve()
            self._events.put(("geometry", self._mesh_body(result)))
            self._events.put(("snapshot", self._components_body()))


def _tcp_reader(sock: socket.socket):
    while True:
        chunk = sock.recv(65536)
        if not chunk:
            return
        yield chunk


class _PushbackSocket:
    """Socket wrapper replaying bytes read past the WS handshake."""

    def __init__(self, sock: socket.socket, head: bytes):
        self._sock = sock
        self._head = head

    def recv(self, n: int) -> bytes:
        if self._head:
            out, self._head = self._head[:n], self._head[n:]
            return out
        return self._sock.recv(n)

    def __getattr__(self, name):
        return getattr(self._sock, name)


def _recv_exact(sock, n: int) -> bytes:
    data = b""
    while len(data) < n:
        chunk = sock.recv(n - len(data))
        if not chunk:
            raise OSError("connection closed mid-frame")
        data += chunk
    return data


def _ws_reader(sock, send_pong):
    """Yield binary payload chunks from a WebSocket stream (server side)."""
    buffered = b""
    while True:
        header = _recv_exact(sock, 2)
        fin = header[0] & 0x80
        opcode = header[0] & 0x0F
        masked = header[1] & 0x80
        length = header[1] & 0x7F
        if length == 126:
            length = int.from_bytes(_recv_exact(sock, 2), "big")
        elif length == 127:
            length = int.from_bytes(_recv_exact(sock, 8), "big")
        mask = _recv_exact(sock, 4) if masked else b""
        payload = _recv_exact(sock, length) if length else b""
        if masked:
            payload = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
        if opcode == 0x8:  # close
            return
        if opcode == 0x9:  # ping -> pong
            send_pong(payload)
            continue
        if opcode in (0x0, 0x2):  # continuation of / start of binary data
            buffered += payload
            if fin:
                yield buffered
                buffered = b""
        # text and pong frames are ignored
