"""Closed-form labeled trajectory generators.

Each generator builds a Trajectory analytically, so its class label is ground
truth by construction. The suite calibrates the behavior classifier and
benchmarks representation quality. Rotating classes use a fixed (CCW) sense
so each class forms one cluster in the signed hand-crafted metric space.
"""

from __future__ import annotations

import math

import numpy as np

from .profiles import SimProfile
from .sim import TWO_PI, Trajectory

LABELS = (
    "aggregation",
    "cyclic_pursuit",
    "dispersal",
    "milling",
    "wall_following",
    "random",
)

_WALL_MARGIN = 0.03


def _assemble(positions, headings, speeds, omegas, profile) -> Trajectory:
    """Pack per-step arrays into a Trajectory (no genome; seed unset)."""
    t1, n = headings.shape
    velocities = np.stack([speeds, omegas], axis=-1)
    sensors = np.zeros((t1, n), dtype=np.int8)
    return Trajectory(
        positions, np.mod(headings, TWO_PI), velocities, sensors, profile, None, None
    )


def make_ring(
    profile: SimProfile,
    radius,
    speed: float,
    steps: int | None = None,
    phase: float = 0.0,
    ccw: bool = True,
) -> Trajectory:
    """Rigid ring rotating about the arena center.

    radius may be a scalar (perfect circle -> cyclic pursuit) or a per-agent
    array (staggered radii -> milling). All agents share the angular rate set
    by the outermost radius, so the fastest agent moves at `speed`.
    """
    steps = profile.episode_steps if steps is None else steps
    n = profile.n_agents
    radii = np.broadcast_to(np.asarray(radius, dtype=np.float64), (n,))
    direction = 1.0 if ccw else -1.0
    omega = direction * speed / radii.max()
    t = np.arange(steps + 1)[:, None] * profile.dt
    base = phase + TWO_PI * np.arange(n)[None, :] / n
    ang = base + omega * t
    cx, cy = profile.arena_width / 2.0, profile.arena_height / 2.0
    positions = np.stack(
        [cx + radii * np.cos(ang), cy + radii * np.sin(ang)], axis=-1
    )
    headings = ang + direction * math.pi / 2.0
    speeds = np.broadcast_to(np.abs(omega) * radii, ang.shape).copy()
    omegas = np.full_like(speeds, omega)
    return _assemble(positions, headings, speeds, omegas, profile)


def make_cyclic_pursuit(profile: SimProfile, seed: int, steps: int | None = None) -> Trajectory:
    rng = np.random.default_rng(seed)
    radius = rng.uniform(0.22, 0.42)
    speed = rng.uniform(0.55, 0.95) * profile.v_max
    return make_ring(profile, radius, speed, steps, phase=rng.uniform(0, TWO_PI))


def make_milling(profile: SimProfile, seed: int, steps: int | None = None) -> Trajectory:
    rng = np.random.default_rng(seed)
    n = profile.n_agents
    radii = rng.uniform(0.12, 0.50, size=n)
    speed = rng.uniform(0.55, 0.95) * profile.v_max
    return make_ring(profile, radii, speed, steps, phase=rng.uniform(0, TWO_PI))


def _radial(profile, seed, steps, n):
    """Shared scaffolding: per-agent outward unit directions and wall limits."""
    rng = np.random.default_rng(seed)
    ang = TWO_PI * (np.arange(n) + rng.uniform(-0.2, 0.2, n)) / n + rng.uniform(0, TWO_PI)
    dx, dy = np.cos(ang), np.sin(ang)
    cx, cy = profile.arena_width / 2.0, profile.arena_height / 2.0
    limit = profile.body_radius + _WALL_MARGIN
    # largest radius along each direction that stays inside the walls
    with np.errstate(divide="ignore"):
        rx = np.where(dx > 0, (profile.arena_width - limit - cx) / dx,
                      np.where(dx < 0, (limit - cx) / dx, np.inf))
        ry = np.where(dy > 0, (profile.arena_height - limit - cy) / dy,
                      np.where(dy < 0, (limit - cy) / dy, np.inf))
    return rng, ang, np.minimum(rx, ry), (cx, cy)


def make_aggregation(profile: SimProfile, seed: int, steps: int | None = None) -> Trajectory:
    """Agents contract exponentially from a spread ring to the arena center."""
    steps = profile.episode_steps if steps is None else steps
    n = profile.n_agents
    rng, ang, r_wall, (cx, cy) = _radial(profile, seed, steps, n)
    r0 = np.minimum(rng.uniform(0.40, 0.55, n), r_wall)
    lam = 0.9 * profile.v_max / r0.max()
    t = np.arange(steps + 1)[:, None] * profile.dt
    r = r0 * np.exp(-lam * t)
    positions = np.stack([cx + r * np.cos(ang), cy + r * np.sin(ang)], axis=-1)
    headings = np.broadcast_to(np.mod(ang + math.pi, TWO_PI), r.shape).copy()
    speeds = lam * r
    omegas = np.zeros_like(speeds)
    return _assemble(positions, headings, speeds, omegas, profile)


def make_dispersal(profile: SimProfile, seed: int, steps: int | None = None) -> Trajectory:
    """Agents explode radially and come to rest near the walls."""
    steps = profile.episode_steps if steps is None else steps
    n = profile.n_agents
    rng, ang, r_wall, (cx, cy) = _radial(profile, seed, steps, n)
    r0 = rng.uniform(0.02, 0.06)
    r_max = r_wall * rng.uniform(0.92, 1.0, n)
    lam = 0.9 * profile.v_max / (r_max - r0).max()
    t = np.arange(steps + 1)[:, None] * profile.dt
    r = r_max - (r_max - r0) * np.exp(-lam * t)
    positions = np.stack([cx + r * np.cos(ang), cy + r * np.sin(ang)], axis=-1)
    headings = np.broadcast_to(ang, r.shape).copy()
    speeds = lam * (r_max - r)
    omegas = np.zeros_like(speeds)
    return _assemble(positions, headings, speeds, omegas, profile)


def make_wall_following(profile: SimProfile, seed: int, steps: int | None = None) -> Trajectory:
    """Agents trace the arena perimeter at speed, hugging the walls."""
    steps = profile.episode_steps if steps is None else steps
    n = profile.n_agents
    rng = np.random.default_rng(seed)
    inset = profile.body_radius + rng.uniform(0.005, 0.02)
    w = profile.arena_width - 2 * inset
    h = profile.arena_height - 2 * inset
    perim = 2 * (w + h)
    speed = rng.uniform(0.6, 0.95) * profile.v_max
    t = np.arange(steps + 1)[:, None] * profile.dt
    s0 = perim * (np.arange(n) / n + rng.uniform(0, 1))
    s = np.mod(s0 + speed * t, perim)

    # rectangle path, counter-clockwise from the bottom-left corner
    x = np.empty_like(s)
    y = np.empty_like(s)
    heading = np.empty_like(s)
    seg1, seg2, seg3 = w, w + h, 2 * w + h
    m0 = s < seg1
    m1 = (s >= seg1) & (s < seg2)
    m2 = (s >= seg2) & (s < seg3)
    m3 = s >= seg3
    x[m0], y[m0], heading[m0] = inset + s[m0], inset, 0.0
    x[m1], y[m1], heading[m1] = inset + w, inset + (s[m1] - seg1), math.pi / 2
    x[m2], y[m2], heading[m2] = inset + w - (s[m2] - seg2), inset + h, math.pi
    x[m3], y[m3], heading[m3] = inset, inset + h - (s[m3] - seg3), 3 * math.pi / 2
    positions = np.stack([x, y], axis=-1)
    speeds = np.full_like(s, speed)
    omegas = np.zeros_like(s)
    return _assemble(positions, heading, speeds, omegas, profile)


def make_random_still(profile: SimProfile, seed: int, steps: int | None = None) -> Trajectory:
    """Scattered motionless agents: no coherent collective pattern."""
    steps = profile.episode_steps if steps is None else steps
    n = profile.n_agents
    rng = np.random.default_rng(seed)
    limit = profile.body_radius + _WALL_MARGIN
    pos0 = np.column_stack([
        rng.uniform(limit, profile.arena_width - limit, n),
        rng.uniform(limit, profile.arena_height - limit, n),
    ])
    positions = np.broadcast_to(pos0, (steps + 1, n, 2)).copy()
    headings = np.broadcast_to(rng.uniform(0, TWO_PI, n), (steps + 1, n)).copy()
    zeros = np.zeros((steps + 1, n))
    return _assemble(positions, headings, zeros, zeros.copy(), profile)


def make_random_jitter(profile: SimProfile, seed: int, steps: int | None = None) -> Trajectory:
    """Incoherent slow wander around scattered anchor points."""
    steps = profile.episode_steps if steps is None else steps
    n = profile.n_agents
    rng = np.random.default_rng(seed)
    limit = profile.body_radius + _WALL_MARGIN + 0.12
    anchor = np.column_stack([
        rng.uniform(limit, profile.arena_width - limit, n),
        rng.uniform(limit, profile.arena_height - limit, n),
    ])
    amp = rng.uniform(0.04, 0.10, n)
    f1 = rng.uniform(0.2, 0.7, n)
    f2 = rng.uniform(0.2, 0.7, n)
    p1 = rng.uniform(0, TWO_PI, n)
    p2 = rng.uniform(0, TWO_PI, n)
    t = np.arange(steps + 1)[:, None] * profile.dt
    x = anchor[:, 0] + amp * np.sin(f1 * t + p1)
    y = anchor[:, 1] + amp * np.sin(f2 * t + p2)
    positions = np.stack([x, y], axis=-1)
    vx = amp * f1 * np.cos(f1 * t + p1)
    vy = amp * f2 * np.cos(f2 * t + p2)
    speeds = np.minimum(np.hypot(vx, vy), profile.v_max)
    headings = np.arctan2(vy, vx)
    omegas = np.zeros_like(speeds)
    return _assemble(positions, headings, speeds, omegas, profile)


GENERATORS = {
    "aggregation": (make_aggregation,),
    "cyclic_pursuit": (make_cyclic_pursuit,),
    "dispersal": (make_dispersal,),
    "milling": (make_milling,),
    "wall_following": (make_wall_following,),
    "random": (make_random_still, make_random_jitter),
}


def make_labeled_suite(
    profile: SimProfile, n_per_class: int, seed: int, steps: int | None = None
) -> list[tuple[Trajectory, str]]:
    """n_per_class labeled trajectories for every behavior class."""
    suite = []
    for ci, label in enumerate(LABELS):
        makers = GENERATORS[label]
        for k in range(n_per_class):
            make = makers[k % len(makers)]
            suite.append((make(profile, seed * 1000 + ci * 100 + k, steps), label))
    return suite
