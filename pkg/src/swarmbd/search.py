"""Novelty-driven evolutionary exploration of the controller space.

Fitness is pure novelty: mean distance to the k nearest previously observed
behavior representations. Every evaluated representation is appended to a
growing archive at its generation boundary; selection in generation g scores
against the archive as of generation g-1 (generation 0 scores leave-self-out
against its own cohort).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .metrics import BehaviorVector
from .profiles import SimProfile
from .sim import ControllerGenome, gene_bounds, run_episode

ARCHIVE_MAGIC = b"SWAR"
ARCHIVE_VERSION = 1


class ArchiveFormatError(ValueError):
    """Malformed archive file; offset is the byte position of the bad item."""

    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} (at byte offset {offset})")


class DiscoveryBackendError(RuntimeError):
    """Embedding backend failed mid-run; carries the partial archive."""

    def __init__(self, generation: int, genome_index: int, archive: "NoveltyArchive"):
        self.generation = generation
        self.genome_index = genome_index
        self.partial_archive = archive
        super().__init__(
            f"embedding backend failed at generation {generation}, genome {genome_index}"
        )


@dataclass
class SearchConfig:
    population: int = 50
    generations: int = 100
    k_neighbors: int = 15
    crossover_rate: float = 0.7
    mutation_rate: float = 0.15
    tournament_size: int = 3
    mutation_sigma_fraction: float = 0.1   # of each gene's full range
    seed: int = 0
    k_medoids: int = 10

    def __post_init__(self):
        if self.population < 2:
            raise ValueError("population must be >= 2")
        if self.generations < 1:
            raise ValueError("generations must be >= 1")
        if self.k_neighbors < 1:
            raise ValueError("k_neighbors must be >= 1")
        for name in ("crossover_rate", "mutation_rate"):
            rate = getattr(self, name)
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {rate}")
        if self.tournament_size < 1:
            raise ValueError("tournament_size must be >= 1")


class NoveltyArchive:
    """Append-only store of every evaluated (genome, behavior vector)."""

    def __init__(self, dim: int, backend: str):
        self.dim = dim
        self.backend = backend
        self._genomes: list[np.ndarray] = []
        self._seeds: list[int] = []
        self._generations: list[int] = []
        self._vectors: list[np.ndarray] = []
        self._novelty: list[float] = []

    def __len__(self) -> int:
        return len(self._vectors)

    def append(self, genome, seed: int, generation: int, vector, novelty_at_insertion: float):
        vec = np.asarray(vector, dtype=np.float64).reshape(-1)
        if vec.shape[0] != self.dim:
            raise ValueError(f"vector dim {vec.shape[0]} != archive dim {self.dim}")
        self._genomes.append(np.asarray(genome, dtype=np.float64).reshape(4).copy())
        self._seeds.append(int(seed))
        self._generations.append(int(generation))
        self._vectors.append(vec.copy())
        self._novelty.append(float(novelty_at_insertion))

    @property
    def vectors(self) -> np.ndarray:
        if not self._vectors:
            return np.empty((0, self.dim))
        return np.stack(self._vectors)

    @property
    def genomes(self) -> np.ndarray:
        if not self._genomes:
            return np.empty((0, 4))
        return np.stack(self._genomes)

    @property
    def seeds(self) -> np.ndarray:
        return np.array(self._seeds, dtype=np.uint64)

    @property
    def generations(self) -> np.ndarray:
        return np.array(self._generations, dtype=np.int64)

    @property
    def novelty_at_insertion(self) -> np.ndarray:
        return np.array(self._novelty, dtype=np.float64)


def _as_vector(b) -> np.ndarray:
    if isinstance(b, BehaviorVector):
        return b.values
    return np.asarray(b, dtype=np.float64).reshape(-1)


def _archive_matrix(archive) -> np.ndarray:
    if isinstance(archive, NoveltyArchive):
        return archive.vectors
    return np.asarray(archive, dtype=np.float64)


def novelty(b, archive, k: int) -> float:
    """Mean L2 distance from b to its k nearest archive entries.

    k larger than the archive is clamped; distance ties are broken by
    insertion order (stable sort). The final average runs in plain Python
    floats so it matches a sort-and-average oracle bit for bit.
    """
    vec = _as_vector(b)
    mat = _archive_matrix(archive)
    if mat.shape[0] == 0:
        raise ValueError("novelty is undefined against an empty archive")
    diffs = mat - vec
    dist = np.sqrt((diffs * diffs).sum(axis=1))
    order = np.argsort(dist, kind="stable")
    kk = min(k, dist.shape[0])
    return sum(dist[order[:kk]].tolist()) / kk


def _cohort_novelty(vectors: np.ndarray, k: int) -> np.ndarray:
    """Leave-self-out novelty of each row against its own cohort."""
    out = np.empty(vectors.shape[0])
    for i in range(vectors.shape[0]):
        rest = np.delete(vectors, i, axis=0)
        out[i] = novelty(vectors[i], rest, k)
    return out


def _tournament(scores: np.ndarray, rng: np.random.Generator, size: int) -> int:
    entrants = rng.integers(0, scores.shape[0], size=size)
    best = entrants[0]
    for idx in entrants[1:]:
        if scores[idx] > scores[best]:
            best = idx
    return int(best)


def evolve_generation(
    population: np.ndarray,
    scores: np.ndarray,
    config: SearchConfig,
    profile: SimProfile,
    rng: np.random.Generator,
) -> np.ndarray:
    """Produce the next population by tournament selection, single-point
    crossover and clamped Gaussian mutation. Deterministic in rng state."""
    pop = np.asarray(population, dtype=np.float64)
    if pop.shape[0] != scores.shape[0]:
        raise ValueError("population and scores must have matching lengths")
    bounds = gene_bounds(profile)
    sigma = config.mutation_sigma_fraction * 2.0 * bounds
    out = np.empty_like(pop)
    for child in range(pop.shape[0]):
        a = _tournament(scores, rng, config.tournament_size)
        b = _tournament(scores, rng, config.tournament_size)
        if rng.random() < config.crossover_rate:
            cut = int(rng.integers(1, 4))
            genes = np.concatenate([pop[a, :cut], pop[b, cut:]])
        else:
            genes = pop[a if scores[a] >= scores[b] else b].copy()
        for g in range(4):
            if rng.random() < config.mutation_rate:
                genes[g] += rng.normal(0.0, sigma[g])
        out[child] = np.clip(genes, -bounds, bounds)
    return out


def sample_population(config: SearchConfig, profile: SimProfile, rng: np.random.Generator) -> np.ndarray:
    bounds = gene_bounds(profile)
    return rng.uniform(-bounds, bounds, size=(config.population, 4))


def run_discovery(
    profile: SimProfile,
    config: SearchConfig,
    backend,
    episode_seed_policy: str = "fixed",
) -> NoveltyArchive:
    """Full novelty search; returns the archive of all P*G representations.

    episode_seed_policy "fixed" evaluates every genome from the same spawn
    (fitness comparisons see identical initial conditions); "per-genome"
    draws a fresh spawn seed for every evaluation.
    """
    if episode_seed_policy not in ("fixed", "per-genome"):
        raise ValueError(f"unknown episode_seed_policy {episode_seed_policy!r}")
    rng = np.random.default_rng(config.seed)
    fixed_seed = int(rng.integers(0, 2**63))
    archive = NoveltyArchive(backend.dim, backend.tag)
    population = sample_population(config, profile, rng)
    scores = np.empty(config.population)
    for gen in range(config.generations):
        if episode_seed_policy == "fixed":
            seeds = np.full(config.population, fixed_seed, dtype=np.uint64)
        else:
            seeds = rng.integers(0, 2**63, size=config.population, dtype=np.uint64)
        vectors = np.empty((config.population, backend.dim))
        for i in range(config.population):
            genome = ControllerGenome.from_array(population[i])
            try:
                traj = run_episode(genome, profile, int(seeds[i]))
                vectors[i] = backend.embed_trajectory(traj, profile)
            except Exception as exc:
                raise DiscoveryBackendError(gen, i, archive) from exc
        if gen == 0:
            scores = _cohort_novelty(vectors, config.k_neighbors)
        else:
            prior = archive.vectors
            for i in range(config.population):
                scores[i] = novelty(vectors[i], prior, config.k_neighbors)
        for i in range(config.population):
            archive.append(population[i], int(seeds[i]), gen, vectors[i], scores[i])
        if gen + 1 < config.generations:
            population = evolve_generation(population, scores, config, profile, rng)
    return archive


def save_archive(archive: NoveltyArchive, path, write_index: bool = True) -> None:
    """Write the binary archive plus a plain-text index beside it."""
    tag = archive.backend.encode("utf-8")
    if len(tag) > 255:
        raise ValueError("backend tag too long for the u8 length prefix")
    with open(path, "wb") as fh:
        fh.write(ARCHIVE_MAGIC)
        fh.write(struct.pack("<H", ARCHIVE_VERSION))
        fh.write(struct.pack("<B", len(tag)))
        fh.write(tag)
        fh.write(struct.pack("<II", archive.dim, len(archive)))
        genomes = archive.genomes.astype(np.float32)
        vectors = archive.vectors.astype(np.float32)
        seeds = archive.seeds
        gens = archive.generations
        for i in range(len(archive)):
            fh.write(genomes[i].tobytes())
            fh.write(struct.pack("<QI", int(seeds[i]), int(gens[i])))
            fh.write(vectors[i].tobytes())
    if write_index:
        novelty_vals = archive.novelty_at_insertion
        genome_rows = archive.genomes
        with open(index_path(path), "w", encoding="utf-8") as fh:
            for i in range(len(archive)):
                genome_txt = "\t".join(repr(float(v)) for v in genome_rows[i])
                fh.write(f"{int(gens[i])}\t{genome_txt}\t{repr(float(novelty_vals[i]))}\n")


def index_path(archive_path) -> str:
    return str(archive_path) + ".index.txt"


def _read_exact(fh, n: int, what: str) -> bytes:
    offset = fh.tell()
    buf = fh.read(n)
    if len(buf) != n:
        raise ArchiveFormatError(f"file ends inside {what}", offset)
    return buf


def load_archive(path) -> NoveltyArchive:
    with open(path, "rb") as fh:
        magic = _read_exact(fh, 4, "magic")
        if magic != ARCHIVE_MAGIC:
            raise ArchiveFormatError(f"bad magic {magic!r}, expected {ARCHIVE_MAGIC!r}", 0)
        (version,) = struct.unpack("<H", _read_exact(fh, 2, "version"))
        if version != ARCHIVE_VERSION:
            raise ArchiveFormatError(f"unsupported version {version}", 4)
        (tag_len,) = struct.unpack("<B", _read_exact(fh, 1, "backend-tag length"))
        tag = _read_exact(fh, tag_len, "backend tag").decode("utf-8")
        dim, count = struct.unpack("<II", _read_exact(fh, 8, "dim/count"))
        archive = NoveltyArchive(dim, tag)
        rec = struct.Struct(f"<4fQI{dim}f")
        for _ in range(count):
            fields = rec.unpack(_read_exact(fh, rec.size, "archive entry"))
            genome = np.array(fields[:4], dtype=np.float32).astype(np.float64)
            seed, gen = fields[4], fields[5]
            vec = np.array(fields[6:], dtype=np.float32).astype(np.float64)
            archive.append(genome, seed, gen, vec, float("nan"))
    return archive
