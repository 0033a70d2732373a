"""Optional real-socket backend.

Wire format: each frame is a 4-byte big-endian length followed by that
many payload bytes; the payload is the canonical envelope encoding. A small
hub accepts endpoint connections, learns their process ids from a hello
frame, and routes envelopes to the destination's connection; deliveries
are serialized per destination by the per-connection write lock. The
acceptance suite runs entirely on the simulated backend; this exists so
the published frame format has a working reference.
"""

from __future__ import annotations

import socket
import struct
import threading
from typing import Callable, Optional

from ..errors import EncodingError, UnknownTarget
from ..harness.encoding import decode_canonical, encode_canonical
from .ids import Envelope, Phase, ProcessId

_HEADER = struct.Struct(">I")
MAX_FRAME = 1 << 24


def encode_frame(env: Envelope) -> bytes:
    payload = encode_canonical(env.to_wire())
    return _HEADER.pack(len(payload)) + payload


class FrameDecoder:
    """Incremental frame splitter: feed() bytes, collect envelopes."""

    def __init__(self):
        self._buf = b""

    def feed(self, data: bytes) -> list[Envelope]:
        self._buf += data
        out = []
        while True:
            if len(self._buf) < _HEADER.size:
                return out
            (length,) = _HEADER.unpack_from(self._buf)
            if length > MAX_FRAME:
                raise EncodingError("frame length %d exceeds limit" % length)
            if len(self._buf) < _HEADER.size + length:
                return out
            payload = self._buf[_HEADER.size:_HEADER.size + length]
            self._buf = self._buf[_HEADER.size + length:]
            out.append(Envelope.from_wire(decode_canonical(payload)))


class SocketHub:
    """Routes frames between registered endpoints."""

    def __init__(self, host: str = "127.0.0.1", port: int = 0):
        self._server = socket.create_server((host, port))
        self.address = self._server.getsockname()
        self._conns: dict[ProcessId, socket.socket] = {}
        self._locks: dict[ProcessId, threading.Lock] = {}
        self._stop = threading.Event()
        self._threads: list[threading.Thread] = []
        self._accept_thread = threading.Thread(target=self._accept_loop, daemon=True)
        self._accept_thread.start()

    def _accept_loop(self) -> None:
        while not self._stop.is_set():
            try:
                conn, _ = self._server.accept()
            except OSError:
                return
            t = threading.Thread(target=self._serve_conn, args=(conn,), daemon=True)
            t.start()
            self._threads.append(t)

    def _serve_conn(self, conn: socket.socket) -> None:
        decoder = FrameDecoder()
        pid: Optional[ProcessId] = None
        try:
            while not self._stop.is_set():
                data = conn.recv(65536)
                if not data:
                    return
                for env in decoder.feed(data):
                    if pid is None and env.kind == "hello":
                        pid = env.src
                        self._conns[pid] = conn
                        self._locks[pid] = threading.Lock()
                        continue
                    self._route(env)
        except OSError:
            return

    def _route(self, env: Envelope) -> None:
        conn = self._conns.get(env.dst)
        if conn is None:
            raise UnknownTarget(str(env.dst))
        with self._locks[env.dst]:
            conn.sendall(encode_frame(env))

    def close(self) -> None:
        self._stop.set()
        self._server.close()
        for conn in self._conns.values():
            try:
                conn.close()
            except OSError:
                pass


class SocketEndpoint:
    """One process's connection to the hub."""

    def __init__(self, pid: ProcessId, hub_address, session: str,
                 on_message: Callable[[Envelope], None]):
        self.pid = pid
        self.session = session
        self._on_message = on_message
        self._sock = socket.create_connection(hub_address)
        hello = Envelope(src=pid, dst=pid, session=session,
                         phase=Phase.CONTROL, kind="hello", seq=0, payload=b"{}")
        self._sock.sendall(encode_frame(hello))
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()

    def send(self, env: Envelope) -> None:
        self._sock.sendall(encode_frame(env))

    def _read_loop(self) -> None:
        decoder = FrameDecoder()
        try:
            while True:
                data = self._sock.recv(65536)
                if not data:
                    return
                for env in decoder.feed(data):
                    self._on_message(env)
        except OSError:
            return

    def close(self) -> None:
        try:
            self._sock.close()
        except OSError:
            pass
