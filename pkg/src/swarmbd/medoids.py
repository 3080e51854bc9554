"""k-Medoids (PAM) selection of representative behaviors.

Greedy BUILD initialization followed by best-improvement SWAP iterations to a
local optimum of total point-to-medoid L2 distance. Single-swap PAM can stall
in a local optimum on small instances, so a few seeded random restarts run
alongside the BUILD start and the cheapest local optimum wins. All tie-breaks
favor the lowest index; results are deterministic in the seed.
"""

from __future__ import annotations

import numpy as np


def pairwise_distances(points: np.ndarray) -> np.ndarray:
    """Exact row-difference pairwise L2 distances (no gram-matrix shortcut,
    which loses precision for near-coincident points)."""
    x = np.asarray(points, dtype=np.float64)
    n = x.shape[0]
    out = np.empty((n, n))
    for i in range(n):
        d = x - x[i]
        out[i] = np.sqrt((d * d).sum(axis=1))
    return out


def medoid_cost(dist: np.ndarray, medoids) -> float:
    return float(dist[np.asarray(medoids)].min(axis=0).sum())


def _build(dist: np.ndarray, k: int) -> list[int]:
    n = dist.shape[0]
    first = int(dist.sum(axis=1).argmin())
    selected = [first]
    dmin = dist[first].copy()
    for _ in range(1, k):
        best_c, best_cost = -1, np.inf
        for c in range(n):
            if c in selected:
                continue
            cost = np.minimum(dmin, dist[c]).sum()
            if cost < best_cost:
                best_cost, best_c = cost, c
        selected.append(best_c)
        dmin = np.minimum(dmin, dist[best_c])
    return selected


def _swap(dist: np.ndarray, selected: list[int]) -> list[int]:
    n = dist.shape[0]
    selected = list(selected)
    while True:
        sel = np.array(selected)
        d_sel = dist[sel]                       # (k, n)
        nearest = d_sel.argmin(axis=0)
        d1 = d_sel[nearest, np.arange(n)]
        current = d1.sum()
        best = (0.0, None)
        for mi in range(len(selected)):
            # nearest distance excluding medoid mi
            masked = np.delete(d_sel, mi, axis=0)
            base = masked.min(axis=0) if masked.size else np.full(n, np.inf)
            for h in range(n):
                if h in selected:
                    continue
                cand = np.minimum(base, dist[h]).sum()
                gain = current - cand
                if gain > best[0] + 1e-12:
                    best = (gain, (mi, h))
        if best[1] is None:
            return selected
        mi, h = best[1]
        selected[mi] = h


def _n_restarts(n: int) -> int:
    if n <= 64:
        return 8
    if n <= 1024:
        return 3
    return 1


def k_medoids(points, k: int, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Select k medoid indices and assign every point to its nearest medoid.

    Accepts an (n, d) array of vectors or a NoveltyArchive.
    """
    if hasattr(points, "vectors"):
        points = points.vectors
    x = np.asarray(points, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    n = x.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    dist = pairwise_distances(x)
    inits = [_build(dist, k)]
    rng = np.random.default_rng(seed)
    for _ in range(_n_restarts(n) - 1):
        inits.append(sorted(rng.choice(n, size=k, replace=False).tolist()))
    best_sel, best_cost = None, np.inf
    for init in inits:
        sel = _swap(dist, init)
        cost = medoid_cost(dist, sel)
        if cost < best_cost - 1e-15:
            best_sel, best_cost = sel, cost
    medoids = np.array(best_sel, dtype=np.int64)
    assignments = dist[medoids].argmin(axis=0)
    return medoids, assignments
