"""Reader for the frame-stack corpus format (magic "SWBD", version 1).

Independent implementation of the documented layout so this package couples
to the producer only through the bytes: little-endian header (magic, u16
version, u32 record count, u8 channels, u16 height, u16 width, u8-length
profile name) followed by records of 4 x f32 genome, u64 seed, raw frames.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Iterator

import numpy as np

MAGIC = b"SWBD"
VERSION = 1
_HEAD = struct.Struct("<IBHH")
_REC_FIXED = struct.Struct("<4fQ")


class CorpusFormatError(ValueError):
    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} (at byte offset {offset})")


@dataclass(frozen=True)
class CorpusHeader:
    record_count: int
    channels: int
    height: int
    width: int
    profile_name: str


def _read_exact(fh, n: int, what: str) -> bytes:
    offset = fh.tell()
    buf = fh.read(n)
    if len(buf) != n:
        raise CorpusFormatError(f"file ends inside {what}", offset)
    return buf


def read_corpus_header(fh) -> CorpusHeader:
    magic = _read_exact(fh, 4, "magic")
    if magic != MAGIC:
        raise CorpusFormatError(f"bad magic {magic!r}", 0)
    (version,) = struct.unpack("<H", _read_exact(fh, 2, "version"))
    if version != VERSION:
        raise CorpusFormatError(f"unsupported version {version}", 4)
    count, channels, height, width = _HEAD.unpack(_read_exact(fh, _HEAD.size, "header"))
    (name_len,) = struct.unpack("<B", _read_exact(fh, 1, "name length"))
    name = _read_exact(fh, name_len, "profile name").decode("utf-8")
    return CorpusHeader(count, channels, height, width, name)


def iter_corpus(path) -> Iterator[tuple[np.ndarray, int, np.ndarray]]:
    """Yield (genome float32 (4,), seed, frames uint8 (c, h, w)) per record."""
    with open(path, "rb") as fh:
        header = read_corpus_header(fh)
        nbytes = header.channels * header.height * header.width
        for _ in range(header.record_count):
            v0, w0, v1, w1, seed = _REC_FIXED.unpack(
                _read_exact(fh, _REC_FIXED.size, "record genome/seed")
            )
            raw = _read_exact(fh, nbytes, "record frames")
            frames = np.frombuffer(raw, dtype=np.uint8).reshape(
                header.channels, header.height, header.width
            ).copy()
            yield np.array([v0, w0, v1, w1], dtype=np.float32), seed, frames


def load_corpus(path) -> tuple[CorpusHeader, np.ndarray]:
    """Load every frame stack into one (n, c, h, w) uint8 array."""
    with open(path, "rb") as fh:
        header = read_corpus_header(fh)
    stacks = np.stack([frames for _, _, frames in iter_corpus(path)]) if header.record_count \
        else np.empty((0, header.channels, header.height, header.width), dtype=np.uint8)
    return header, stacks
