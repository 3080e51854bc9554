"""Embedding server speaking wire protocol v1 on stdio or TCP.

Handshake: magic "SWEM", u16 version, u8 channels, u16 height, u16 width;
reply magic, u16 version, u32 embedding_dim. Shape mismatches are refused by
replying dim=0 and closing. Requests are u64 id + frame bytes, responses
u64 id + 512 float32. A request truncated mid-frame draws an error response
(id 2**64-1, no payload) before the connection closes. One session per
process/connection, served strictly sequentially.
"""

from __future__ import annotations

import socket
import struct
import sys

import numpy as np
import torch

from .model import EMBEDDING_DIM, BehaviorEncoder, preprocess
from .train import load_checkpoint

MAGIC = b"SWEM"
VERSION = 1
ERROR_ID = 2**64 - 1


class _Stream:
    """Blocking byte stream over stdio pipes or a connected socket."""

    def __init__(self, read_fh=None, write_fh=None, sock=None):
        self._read = read_fh
        self._write = write_fh
        self._sock = sock

    def recv(self, n: int) -> bytes:
        buf = b""
        while len(buf) < n:
            chunk = self._sock.recv(n - len(buf)) if self._sock else self._read.read(n - len(buf))
            if not chunk:
                break
            buf += chunk
        return buf

    def send(self, data: bytes) -> None:
        if self._sock:
            self._sock.sendall(data)
        else:
            self._write.write(data)
            self._write.flush()


def _embed(model: BehaviorEncoder, payload: bytes, shape) -> bytes:
    # frombuffer views are read-only; torch needs a writable array
    frames = np.frombuffer(payload, dtype=np.uint8).reshape(shape).copy()
    with torch.inference_mode():
        vec = model.embed(preprocess(frames))[0]
    return vec.numpy().astype("<f4").tobytes()


def serve_session(model: BehaviorEncoder, input_shape, stream: _Stream, log=lambda msg: None) -> int:
    """Serve one session until the peer closes; returns a process exit code."""
    head = stream.recv(11)
    if len(head) < 11 or head[:4] != MAGIC:
        log("handshake: bad magic or short read")
        return 1
    version, channels, height, width = struct.unpack("<HBHH", head[4:])
    if version != VERSION or (channels, height, width) != tuple(input_shape):
        # refuse: dim 0 tells the client the shapes disagree
        stream.send(MAGIC + struct.pack("<HI", VERSION, 0))
        log(f"handshake refused: version={version} shape=({channels},{height},{width})")
        return 1
    stream.send(MAGIC + struct.pack("<HI", VERSION, EMBEDDING_DIM))
    frame_bytes = channels * height * width
    served = 0
    while True:
        head = stream.recv(8)
        if not head:
            log(f"session closed after {served} requests")
            return 0
        if len(head) < 8:
            stream.send(struct.pack("<Q", ERROR_ID))
            log("malformed request: truncated id")
            return 1
        (req_id,) = struct.unpack("<Q", head)
        payload = stream.recv(frame_bytes)
        if len(payload) < frame_bytes:
            stream.send(struct.pack("<Q", ERROR_ID))
            log(f"malformed request {req_id}: truncated frames")
            return 1
        stream.send(struct.pack("<Q", req_id) + _embed(model, payload, tuple(input_shape)))
        served += 1


def serve(checkpoint_path, transport: str = "stdio", log=lambda msg: None) -> int:
    """Run the server until the transport closes.

    transport is "stdio" (default) or "tcp:HOST:PORT"; TCP accepts one
    connection at a time, sequentially, until interrupted.
    """
    model, checkpoint = load_checkpoint(checkpoint_path)
    input_shape = checkpoint["input_shape"]
    if transport == "stdio":
        stream = _Stream(read_fh=sys.stdin.buffer, write_fh=sys.stdout.buffer)
        return serve_session(model, input_shape, stream, log)
    if transport.startswith("tcp:"):
        _, host, port = transport.split(":")
        listener = socket.create_server((host, int(port)))
        log(f"listening on {host}:{port}")
        try:
            while True:
                conn, peer = listener.accept()
                log(f"session from {peer}")
                with conn:
                    serve_session(model, input_shape, _Stream(sock=conn), log)
        finally:
            listener.close()
    raise ValueError(f"unknown transport {transport!r}")
