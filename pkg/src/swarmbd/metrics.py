"""Hand-crafted behavior metrics and the behavior-vector type.

The five normalized order parameters (average speed, angular momentum, radial
variance, scatter, group rotation) are computed over the last half of the
episode, the same window the frame stacks summarize, so both representation
backends describe the converged behavior.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .profiles import SimProfile
from .sim import Trajectory

METRICS_BACKEND_TAG = "metrics"
LEARNED_BACKEND_TAG = "learned"


@dataclass(frozen=True)
class BehaviorVector:
    """A point in behavior space plus the backend that produced it."""

    values: np.ndarray
    backend: str

    @property
    def dim(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class HandcraftedMetrics:
    avg_speed: float          # in [0, 1]
    angular_momentum: float   # in [-1, 1]
    radial_variance: float    # >= 0
    scatter: float            # >= 0
    group_rotation: float     # in [-1, 1]

    def as_vector(self) -> BehaviorVector:
        return BehaviorVector(
            np.array(
                [self.avg_speed, self.angular_momentum, self.radial_variance,
                 self.scatter, self.group_rotation],
                dtype=np.float64,
            ),
            METRICS_BACKEND_TAG,
        )


def half_arena_diagonal(profile: SimProfile) -> float:
    return 0.5 * math.hypot(profile.arena_width, profile.arena_height)


def _window(traj: Trajectory) -> slice:
    t = traj.episode_steps
    return slice(t // 2, t)


def handcrafted_embed(traj: Trajectory, profile: SimProfile) -> HandcraftedMetrics:
    """Five normalized order parameters of the swarm's converged motion."""
    if traj.positions.shape[0] < 2:
        raise ValueError("trajectory must contain at least 2 snapshots")
    win = _window(traj)
    pos = traj.positions[win]            # (M, N, 2)
    hdg = traj.headings[win]             # (M, N)
    v = traj.velocities[win][..., 0]     # (M, N) signed linear command

    r_norm = half_arena_diagonal(profile)
    vx = v * np.cos(hdg)
    vy = v * np.sin(hdg)
    speed = np.abs(v)

    centroid = pos.mean(axis=1, keepdims=True)
    rel = pos - centroid                 # (M, N, 2)
    radius = np.sqrt(rel[..., 0] ** 2 + rel[..., 1] ** 2)

    # normalize per sample so a cap-saturated swarm averages to exactly 1.0
    avg_speed = (speed / profile.v_max).mean()
    cross = rel[..., 0] * vy - rel[..., 1] * vx
    angular_momentum = cross.mean(axis=1).mean() / (r_norm * profile.v_max)
    radial_variance = radius.var(axis=1).mean() / r_norm**2
    scatter = (radius**2).mean(axis=1).mean() / r_norm**2

    # unit tangents about the centroid; agents at the centroid contribute 0
    with np.errstate(invalid="ignore", divide="ignore"):
        tx = np.where(radius > 0, -rel[..., 1] / radius, 0.0)
        ty = np.where(radius > 0, rel[..., 0] / radius, 0.0)
        vhx = np.where(speed > 0, vx / speed, 0.0)
        vhy = np.where(speed > 0, vy / speed, 0.0)
    group_rotation = (vhx * tx + vhy * ty).mean(axis=1).mean()

    return HandcraftedMetrics(
        float(avg_speed),
        float(angular_momentum),
        float(radial_variance),
        float(scatter),
        float(group_rotation),
    )


def scatter_series(traj: Trajectory, profile: SimProfile) -> np.ndarray:
    """Per-snapshot normalized scatter over the whole episode (length T+1)."""
    pos = traj.positions
    rel = pos - pos.mean(axis=1, keepdims=True)
    r2 = rel[..., 0] ** 2 + rel[..., 1] ** 2
    return r2.mean(axis=1) / half_arena_diagonal(profile) ** 2


def mean_wall_clearance(traj: Trajectory, profile: SimProfile) -> float:
    """Mean body-edge distance to the nearest wall over the metric window."""
    pos = traj.positions[_window(traj)]
    x = pos[..., 0]
    y = pos[..., 1]
    near = np.minimum(
        np.minimum(x, profile.arena_width - x),
        np.minimum(y, profile.arena_height - y),
    )
    return float(near.mean() - profile.body_radius)


def behavior_distance(a: BehaviorVector, b: BehaviorVector) -> float:
    """Euclidean distance between two behavior vectors of the same backend."""
    if a.backend != b.backend:
        raise ValueError(f"backend mismatch: {a.backend!r} vs {b.backend!r}")
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return float(np.sqrt(((a.values - b.values) ** 2).sum()))


class MetricsBackend:
    """Behavior-map backend built on the hand-crafted metrics (5-d)."""

    tag = METRICS_BACKEND_TAG
    dim = 5

    def embed_trajectory(self, traj: Trajectory, profile: SimProfile) -> np.ndarray:
        return handcrafted_embed(traj, profile).as_vector().values
