"""Training-corpus file format and random-controller dataset generation.

Layout (little-endian): magic "SWBD", u16 version=1, u32 record count,
u8 channels, u16 height, u16 width, u8 profile-name length + bytes; then per
record: 4 x f32 genome, u64 seed, channels*height*width frame bytes.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .profiles import SimProfile
from .render import subsample
from .sim import ControllerGenome, gene_bounds, run_episode

MAGIC = b"SWBD"
VERSION = 1
_HEAD = struct.Struct("<IBHH")       # record_count, channels, height, width
_REC_FIXED = struct.Struct("<4fQ")   # genome, seed


class DatasetFormatError(ValueError):
    """Malformed dataset file; offset is the byte position of the bad item."""

    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} (at byte offset {offset})")


class DatasetMagicError(DatasetFormatError):
    pass


class DatasetVersionError(DatasetFormatError):
    pass


class DatasetTruncatedError(DatasetFormatError):
    pass


@dataclass(frozen=True)
class DatasetHeader:
    record_count: int
    channels: int
    height: int
    width: int
    profile_name: str


@dataclass(frozen=True)
class DatasetRecord:
    genome: np.ndarray   # (4,) float32
    seed: int
    frames: np.ndarray   # (channels, height, width) uint8

    def __eq__(self, other):
        return (
            isinstance(other, DatasetRecord)
            and self.seed == other.seed
            and np.array_equal(self.genome, other.genome)
            and np.array_equal(self.frames, other.frames)
        )


def write_dataset(records: Iterable[DatasetRecord], path, profile_name: str = "rsrs") -> int:
    """Write records to path; returns the number written.

    All records must share frame dimensions. The iterable is materialized to
    know the count up front; use DatasetWriter for true streaming output.
    """
    records = list(records)
    if records:
        c, h, w = records[0].frames.shape
    else:
        c, h, w = 3, 64, 64
    with DatasetWriter(path, len(records), c, h, w, profile_name) as out:
        for rec in records:
            out.append(rec)
    return len(records)


class DatasetWriter:
    """Streaming record-at-a-time writer; count is fixed at open time."""

    def __init__(self, path, record_count: int, channels: int, height: int, width: int,
                 profile_name: str = "rsrs"):
        name = profile_name.encode("utf-8")
        if len(name) > 255:
            raise ValueError("profile name too long for the u8 length prefix")
        self._expect = record_count
        self._shape = (channels, height, width)
        self._written = 0
        self._fh = open(path, "wb")
        self._fh.write(MAGIC)
        self._fh.write(struct.pack("<H", VERSION))
        self._fh.write(_HEAD.pack(record_count, channels, height, width))
        self._fh.write(struct.pack("<B", len(name)))
        self._fh.write(name)

    def append(self, rec: DatasetRecord) -> None:
        if rec.frames.shape != self._shape:
            raise ValueError(f"frame shape {rec.frames.shape} != dataset shape {self._shape}")
        genome = np.asarray(rec.genome, dtype=np.float32).reshape(4)
        self._fh.write(_REC_FIXED.pack(*genome.tolist(), rec.seed))
        self._fh.write(np.ascontiguousarray(rec.frames, dtype=np.uint8).tobytes())
        self._written += 1

    def close(self) -> None:
        if not self._fh.closed:
            self._fh.close()
            if self._written != self._expect:
                raise ValueError(
                    f"dataset declared {self._expect} records but {self._written} were written"
                )

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is None:
            self.close()
        else:
            self._fh.close()


def _read_exact(fh, n: int, what: str) -> bytes:
    offset = fh.tell()
    buf = fh.read(n)
    if len(buf) != n:
        raise DatasetTruncatedError(f"file ends inside {what}", offset)
    return buf


def read_header(fh) -> DatasetHeader:
    magic = _read_exact(fh, 4, "magic")
    if magic != MAGIC:
        raise DatasetMagicError(f"bad magic {magic!r}, expected {MAGIC!r}", 0)
    (version,) = struct.unpack("<H", _read_exact(fh, 2, "version"))
    if version != VERSION:
        raise DatasetVersionError(f"unsupported version {version}", 4)
    count, channels, height, width = _HEAD.unpack(_read_exact(fh, _HEAD.size, "header"))
    (name_len,) = struct.unpack("<B", _read_exact(fh, 1, "profile-name length"))
    name = _read_exact(fh, name_len, "profile name").decode("utf-8")
    return DatasetHeader(count, channels, height, width, name)


def iter_dataset(path) -> Iterator[DatasetRecord]:
    """Stream records one at a time; header errors raise before the first yield."""
    with open(path, "rb") as fh:
        header = read_header(fh)
        frame_bytes = header.channels * header.height * header.width
        for _ in range(header.record_count):
            fixed = _read_exact(fh, _REC_FIXED.size, "record genome/seed")
            v0, w0, v1, w1, seed = _REC_FIXED.unpack(fixed)
            raw = _read_exact(fh, frame_bytes, "record frames")
            frames = np.frombuffer(raw, dtype=np.uint8).reshape(
                header.channels, header.height, header.width
            )
            yield DatasetRecord(
                np.array([v0, w0, v1, w1], dtype=np.float32), seed, frames.copy()
            )


def read_dataset(path) -> tuple[DatasetHeader, list[DatasetRecord]]:
    with open(path, "rb") as fh:
        header = read_header(fh)
    return header, list(iter_dataset(path))


def sample_genomes(n: int, profile: SimProfile, rng: np.random.Generator) -> np.ndarray:
    """Uniform i.i.d. genomes over the bounded controller space, shape (n, 4)."""
    bounds = gene_bounds(profile)
    return rng.uniform(-bounds, bounds, size=(n, 4))


def generate_dataset(
    n: int,
    profile: SimProfile,
    seed: int,
    path,
    profile_name: str = "rsrs",
    width: int = 64,
    height: int = 64,
) -> dict:
    """Simulate n uniformly sampled controllers and write their frame stacks.

    Deterministic in seed; records are ordered by genome index.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    genomes = sample_genomes(n, profile, rng)
    seeds = rng.integers(0, 2**63, size=n, dtype=np.uint64)
    try:
        with DatasetWriter(path, n, 3, height, width, profile_name) as out:
            for i in range(n):
                genome = ControllerGenome.from_array(genomes[i])
                traj = run_episode(genome, profile, int(seeds[i]))
                stack = subsample(traj, width, height)
                out.append(DatasetRecord(genomes[i].astype(np.float32), int(seeds[i]), stack.channels))
    except OSError as exc:
        raise OSError(f"writing dataset to {path}: {exc}") from exc
    return {"records": n, "path": str(path), "profile": profile_name,
            "frame_shape": (3, height, width)}
