"""Client side of the embedding wire protocol (v1).

Handshake: client sends magic "SWEM", u16 version, u8 channels, u16 height,
u16 width; the server replies magic, u16 version, u32 embedding_dim. Each
request is u64 request_id + raw frame bytes; each response is u64 request_id
+ embedding_dim float32 values. All integers little-endian. Transport is a
child process speaking the protocol on stdio (default) or a TCP socket.
"""

from __future__ import annotations

import selectors
import shlex
import socket
import struct
import subprocess
from dataclasses import dataclass

import numpy as np

from .metrics import LEARNED_BACKEND_TAG, BehaviorVector
from .profiles import SimProfile
from .render import FrameStack, subsample
from .sim import Trajectory

MAGIC = b"SWEM"
VERSION = 1


class ProtocolError(RuntimeError):
    """Base class for embedding-endpoint failures."""


class TransportError(ProtocolError):
    pass


class HandshakeError(ProtocolError):
    pass


class ResponseMismatchError(ProtocolError):
    pass


class EmbedTimeoutError(ProtocolError):
    pass


@dataclass(frozen=True)
class EmbeddingEndpoint:
    """Address of an embedding server: "host:port" or a command line."""

    spec: str

    @property
    def is_tcp(self) -> bool:
        host, sep, port = self.spec.rpartition(":")
        return bool(sep) and port.isdigit() and "/" not in host and " " not in host


class _SubprocessTransport:
    def __init__(self, command: str):
        try:
            self._proc = subprocess.Popen(
                shlex.split(command),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
            )
        except OSError as exc:
            raise TransportError(f"failed to spawn {command!r}: {exc}") from exc
        self._sel = selectors.DefaultSelector()
        self._sel.register(self._proc.stdout, selectors.EVENT_READ)

    def send(self, data: bytes) -> None:
        try:
            self._proc.stdin.write(data)
            self._proc.stdin.flush()
        except (BrokenPipeError, ValueError) as exc:
            raise TransportError(f"server pipe closed: {exc}") from exc

    def recv_exact(self, n: int, timeout: float | None) -> bytes:
        buf = b""
        while len(buf) < n:
            if timeout is not None and not self._sel.select(timeout):
                raise EmbedTimeoutError(f"no response within {timeout}s")
            chunk = self._proc.stdout.read1(n - len(buf))
            if not chunk:
                raise TransportError("server closed the stream")
            buf += chunk
        return buf

    def close(self) -> None:
        self._sel.close()
        if self._proc.poll() is None:
            self._proc.stdin.close()
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()


class _TcpTransport:
    def __init__(self, host: str, port: int):
        try:
            self._sock = socket.create_connection((host, port), timeout=10)
        except OSError as exc:
            raise TransportError(f"failed to connect to {host}:{port}: {exc}") from exc

    def send(self, data: bytes) -> None:
        try:
            self._sock.sendall(data)
        except OSError as exc:
            raise TransportError(f"socket send failed: {exc}") from exc

    def recv_exact(self, n: int, timeout: float | None) -> bytes:
        self._sock.settimeout(timeout)
        buf = b""
        while len(buf) < n:
            try:
                chunk = self._sock.recv(n - len(buf))
            except socket.timeout:
                raise EmbedTimeoutError(f"no response within {timeout}s") from None
            except OSError as exc:
                raise TransportError(f"socket recv failed: {exc}") from exc
            if not chunk:
                raise TransportError("server closed the connection")
            buf += chunk
        return buf

    def close(self) -> None:
        self._sock.close()


class EndpointSession:
    """One sequential request/response channel to an embedding server.

    Requests are never interleaved within a session; parallel embedding needs
    multiple sessions. Requests are idempotent, so callers may retry after a
    transport error on a fresh session.
    """

    def __init__(self, endpoint: EmbeddingEndpoint, channels: int = 3,
                 height: int = 64, width: int = 64, timeout: float | None = 30.0):
        self.channels = channels
        self.height = height
        self.width = width
        self.timeout = timeout
        self._next_id = 1
        if endpoint.is_tcp:
            host, _, port = endpoint.spec.rpartition(":")
            self._transport = _TcpTransport(host, int(port))
        else:
            self._transport = _SubprocessTransport(endpoint.spec)
        try:
            self._transport.send(
                MAGIC + struct.pack("<HBHH", VERSION, channels, height, width)
            )
            reply = self._transport.recv_exact(10, timeout)
        except ProtocolError:
            self._transport.close()
            raise
        magic, version, dim = reply[:4], *struct.unpack("<HI", reply[4:])
        if magic != MAGIC:
            self._transport.close()
            raise HandshakeError(f"server replied with bad magic {magic!r}")
        if version != VERSION:
            self._transport.close()
            raise HandshakeError(f"server speaks version {version}, expected {VERSION}")
        if dim < 1:
            self._transport.close()
            raise HandshakeError(f"server reported embedding dim {dim}")
        self.embedding_dim = int(dim)

    def embed(self, stack: FrameStack | np.ndarray) -> np.ndarray:
        """Embed one frame stack; returns float32 (embedding_dim,)."""
        frames = stack.channels if isinstance(stack, FrameStack) else np.asarray(stack)
        expect = (self.channels, self.height, self.width)
        if frames.shape != expect:
            raise ValueError(f"stack shape {frames.shape} != session shape {expect}")
        if frames.dtype != np.uint8:
            raise ValueError(f"stack dtype {frames.dtype} != uint8")
        req_id = self._next_id
        self._next_id += 1
        self._transport.send(struct.pack("<Q", req_id) + frames.tobytes())
        reply_id = struct.unpack("<Q", self._transport.recv_exact(8, self.timeout))[0]
        if reply_id != req_id:
            raise ResponseMismatchError(f"response id {reply_id} != request id {req_id}")
        payload = self._transport.recv_exact(4 * self.embedding_dim, self.timeout)
        vec = np.frombuffer(payload, dtype="<f4").astype(np.float32)
        if not np.all(np.isfinite(vec)):
            raise ProtocolError("server returned non-finite embedding values")
        return vec

    def close(self) -> None:
        self._transport.close()

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        self.close()


def learned_embed(stack: FrameStack, endpoint: EndpointSession) -> BehaviorVector:
    """Embed a frame stack through a live endpoint session."""
    return BehaviorVector(endpoint.embed(stack).astype(np.float64), LEARNED_BACKEND_TAG)


class EndpointBackend:
    """Behavior-map backend that rasterizes episodes and queries a server."""

    tag = LEARNED_BACKEND_TAG

    def __init__(self, session: EndpointSession):
        self.session = session
        self.dim = session.embedding_dim

    def embed_trajectory(self, traj: Trajectory, profile: SimProfile) -> np.ndarray:
        stack = subsample(traj, self.session.width, self.session.height)
        return self.session.embed(stack).astype(np.float64)
