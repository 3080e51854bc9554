import math

import numpy as np
import pytest

from swarmbd.metrics import MetricsBackend
from swarmbd.search import (
    ArchiveFormatError,
    DiscoveryBackendError,
    NoveltyArchive,
    SearchConfig,
    evolve_generation,
    load_archive,
    index_path,
    novelty,
    run_discovery,
    sample_population,
    save_archive,
)
from swarmbd.sim import gene_bounds


def novelty_oracle(b, vectors, k):
    """Independent brute force: per-pair python distances, sort, average."""
    dists = []
    for row in vectors:
        s = 0.0
        for u, w in zip(b, row):
            d = float(u) - float(w)
            s += d * d
        dists.append(math.sqrt(s))
    dists.sort()
    kk = min(k, len(dists))
    return sum(dists[:kk]) / kk


# ---------------------------------------------------------------------------
# novelty

def test_novelty_two_nearest():
    archive = np.array([[1.0, 0.0], [0.0, 1.0], [3.0, 4.0]])
    assert novelty(np.zeros(2), archive, 2) == 1.0


def test_novelty_duplicate_point():
    assert novelty(np.zeros(2), np.zeros((1, 2)), 1) == 0.0


def test_novelty_k_clamped_to_archive():
    assert novelty(np.zeros(2), np.array([[3.0, 4.0]]), 15) == 5.0


def test_novelty_empty_archive_rejected():
    with pytest.raises(ValueError, match="empty"):
        novelty(np.zeros(2), np.empty((0, 2)), 3)


def test_novelty_matches_bruteforce_oracle():
    rng = np.random.default_rng(42)
    for _ in range(60):
        n = int(rng.integers(1, 400))
        d = int(rng.integers(1, 7))
        k = int(rng.integers(1, 25))
        vectors = rng.normal(size=(n, d))
        b = rng.normal(size=d)
        assert novelty(b, vectors, k) == novelty_oracle(b, vectors, k)


def test_novelty_tie_break_is_stable():
    # four archive points at identical distance: first two by insertion win
    archive = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
    assert novelty(np.zeros(2), archive, 2) == 1.0


def test_adding_duplicate_never_increases_novelty():
    rng = np.random.default_rng(7)
    for _ in range(50):
        n = int(rng.integers(2, 60))
        d = int(rng.integers(1, 6))
        k = int(rng.integers(1, 10))
        vectors = rng.normal(size=(n, d))
        b = rng.normal(size=d)
        before = novelty(b, vectors, k)
        after = novelty(b, np.vstack([vectors, b]), k)
        assert after <= before


# ---------------------------------------------------------------------------
# evolution

def _config(**kw):
    base = dict(population=12, generations=3, k_neighbors=3, seed=5)
    base.update(kw)
    return SearchConfig(**base)


def test_degenerate_operators_clone_winners(rsrs):
    config = _config(crossover_rate=0.0, mutation_rate=0.0)
    rng = np.random.default_rng(0)
    pop = sample_population(config, rsrs, rng)
    scores = np.arange(config.population, dtype=float)
    nxt = evolve_generation(pop, scores, config, rsrs, rng)
    rows = {tuple(r) for r in pop}
    for child in nxt:
        assert tuple(child) in rows


def test_mutation_clamps_to_bounds_exactly(rsrs):
    config = _config(crossover_rate=0.0, mutation_rate=1.0, mutation_sigma_fraction=50.0)
    rng = np.random.default_rng(3)
    pop = sample_population(config, rsrs, rng)
    scores = np.zeros(config.population)
    nxt = evolve_generation(pop, scores, config, rsrs, rng)
    bounds = gene_bounds(rsrs)
    assert np.all(np.abs(nxt) <= bounds)
    # with sigma this large nearly every gene lands on a bound exactly
    at_bound = np.isclose(np.abs(nxt), bounds, rtol=0, atol=0)
    assert at_bound.any()
    assert np.abs(nxt[:, 0]).max() == rsrs.v_max


def test_evolution_deterministic(rsrs):
    config = _config()
    pop = sample_population(config, rsrs, np.random.default_rng(1))
    scores = np.random.default_rng(2).uniform(size=config.population)
    a = evolve_generation(pop, scores, config, rsrs, np.random.default_rng(9))
    b = evolve_generation(pop, scores, config, rsrs, np.random.default_rng(9))
    assert np.array_equal(a, b)


def test_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(population=1)
    with pytest.raises(ValueError):
        SearchConfig(crossover_rate=1.2)
    with pytest.raises(ValueError):
        SearchConfig(k_neighbors=0)


# ---------------------------------------------------------------------------
# full discovery

def test_single_generation_archive_is_initial_population(rsrs):
    config = _config(population=8, generations=1)
    archive = run_discovery(rsrs, config, MetricsBackend())
    assert len(archive) == 8
    rng = np.random.default_rng(config.seed)
    rng.integers(0, 2**63)   # fixed episode seed drawn first
    expected = sample_population(config, rsrs, rng)
    assert np.array_equal(archive.genomes, expected)
    assert np.all(archive.generations == 0)


def test_archive_arithmetic_and_growth(rsrs):
    config = _config(population=10, generations=10)
    archive = run_discovery(rsrs, config, MetricsBackend())
    assert len(archive) == 100
    gens = archive.generations
    for g in range(10):
        assert (gens == g).sum() == 10
        assert (gens <= g).sum() == 10 * (g + 1)


def test_discovery_deterministic(rsrs):
    config = _config(population=6, generations=4, seed=123)
    a = run_discovery(rsrs, config, MetricsBackend())
    b = run_discovery(rsrs, config, MetricsBackend())
    assert np.array_equal(a.vectors, b.vectors)
    assert np.array_equal(a.genomes, b.genomes)
    assert np.array_equal(a.seeds, b.seeds)


def test_all_evaluated_genomes_within_bounds(rsrs):
    config = _config(population=8, generations=6, mutation_rate=0.8)
    archive = run_discovery(rsrs, config, MetricsBackend())
    assert np.all(np.abs(archive.genomes) <= gene_bounds(rsrs))


def test_seed_policy_changes_seeds(rsrs):
    fixed = run_discovery(rsrs, _config(population=4, generations=2), MetricsBackend(), "fixed")
    per = run_discovery(rsrs, _config(population=4, generations=2), MetricsBackend(), "per-genome")
    assert len(set(fixed.seeds.tolist())) == 1
    assert len(set(per.seeds.tolist())) > 1
    with pytest.raises(ValueError):
        run_discovery(rsrs, _config(), MetricsBackend(), "sometimes")


def test_backend_failure_carries_partial_archive(rsrs):
    class FlakyBackend(MetricsBackend):
        calls = 0

        def embed_trajectory(self, traj, profile):
            FlakyBackend.calls += 1
            if FlakyBackend.calls > 10:
                raise RuntimeError("connection lost")
            return super().embed_trajectory(traj, profile)

    with pytest.raises(DiscoveryBackendError) as err:
        run_discovery(rsrs, _config(population=6, generations=3), FlakyBackend())
    assert err.value.generation == 1
    assert err.value.genome_index == 4
    assert len(err.value.partial_archive) == 6   # generation 0 was completed


# ---------------------------------------------------------------------------
# archive persistence

def _toy_archive(n=20, d=5, seed=0):
    rng = np.random.default_rng(seed)
    archive = NoveltyArchive(d, "metrics")
    for i in range(n):
        archive.append(
            rng.uniform(-1, 1, 4).astype(np.float32).astype(np.float64),
            int(rng.integers(0, 2**63)), i // 5,
            rng.normal(size=d).astype(np.float32).astype(np.float64),
            float(rng.uniform()),
        )
    return archive


def test_archive_round_trip(tmp_path):
    archive = _toy_archive()
    path = tmp_path / "a.swar"
    save_archive(archive, path)
    back = load_archive(path)
    assert back.backend == "metrics"
    assert back.dim == 5
    assert np.array_equal(back.genomes, archive.genomes)
    assert np.array_equal(back.seeds, archive.seeds)
    assert np.array_equal(back.generations, archive.generations)
    assert np.array_equal(back.vectors, archive.vectors)


def test_archive_round_trip_bytes_identical(tmp_path):
    archive = _toy_archive()
    p1, p2 = tmp_path / "a.swar", tmp_path / "b.swar"
    save_archive(archive, p1)
    save_archive(load_archive(p1), p2, write_index=False)
    assert p1.read_bytes() == p2.read_bytes()


def test_archive_index_lines(tmp_path):
    archive = _toy_archive(n=6)
    path = tmp_path / "a.swar"
    save_archive(archive, path)
    lines = open(index_path(path)).read().splitlines()
    assert len(lines) == 6
    gen, *rest = lines[3].split("\t")
    assert int(gen) == archive.generations[3]
    assert [float(x) for x in rest[:4]] == pytest.approx(archive.genomes[3])
    assert float(rest[4]) == archive.novelty_at_insertion[3]


def test_archive_bad_magic(tmp_path):
    path = tmp_path / "a.swar"
    path.write_bytes(b"XXXX" + b"\x00" * 30)
    with pytest.raises(ArchiveFormatError) as err:
        load_archive(path)
    assert err.value.offset == 0


def test_archive_truncation_offset(tmp_path):
    archive = _toy_archive(n=3)
    path = tmp_path / "a.swar"
    save_archive(archive, path)
    raw = path.read_bytes()
    header = 4 + 2 + 1 + len(b"metrics") + 8
    entry = 16 + 12 + 5 * 4
    cut = header + entry + 10
    (tmp_path / "t.swar").write_bytes(raw[:cut])
    with pytest.raises(ArchiveFormatError) as err:
        load_archive(tmp_path / "t.swar")
    assert err.value.offset == header + entry
