"""2D swarm simulation: unicycle agents, line-of-sight sensing, disc collisions.

Each agent runs the same 4-gene if-else controller: commanded (v, w) is one
pair when the forward ray sees another agent, the other pair when it does not.
Integration is explicit Euler; collisions (agent-agent and agent-wall) are
resolved by positional projection with optional tangential friction. Episodes
are pure functions of (genome, profile, seed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .profiles import ConfigurationError, SimProfile

TWO_PI = 2.0 * math.pi

# Numerical slack for projection-based collision resolution.
PENETRATION_TOL = 1e-6
# Pair projection triggers only on penetration deeper than this, so resolved
# contacts (separation == 2r up to rounding) do not retrigger forever.
_CONTACT_EPS = 1e-9
# Passes stop early once a sweep finds no contact; dense pile-ups have been
# observed to need ~200 passes to clear every overlap, so the cap is generous.
MAX_COLLISION_PASSES = 1024

# Spawn lattice: 4 columns x 3 rows, 0.25 m pitch, centered in the arena.
SPAWN_COLS = 4
SPAWN_ROWS = 3
SPAWN_SPACING = 0.25

GENE_NAMES = ("u_v0", "u_w0", "u_v1", "u_w1")


class GenomeBoundsError(ValueError):
    """A controller gene exceeds the profile's velocity caps."""

    def __init__(self, gene: str, value: float, bound: float):
        self.gene = gene
        self.value = value
        self.bound = bound
        super().__init__(f"gene {gene}={value!r} outside [{-bound!r}, {bound!r}]")


@dataclass(frozen=True)
class ControllerGenome:
    """The 4-gene if-else controller: (v, w) on sensor 0, (v, w) on sensor 1."""

    u_v0: float
    u_w0: float
    u_v1: float
    u_w1: float

    def as_array(self) -> np.ndarray:
        return np.array([self.u_v0, self.u_w0, self.u_v1, self.u_w1], dtype=np.float64)

    @classmethod
    def from_array(cls, arr) -> "ControllerGenome":
        a = np.asarray(arr, dtype=np.float64).reshape(4)
        return cls(float(a[0]), float(a[1]), float(a[2]), float(a[3]))

    def validate(self, profile: SimProfile) -> None:
        bounds = gene_bounds(profile)
        for name, value, bound in zip(GENE_NAMES, self.as_array(), bounds):
            if not math.isfinite(value) or abs(value) > bound:
                raise GenomeBoundsError(name, float(value), float(bound))


def gene_bounds(profile: SimProfile) -> np.ndarray:
    """Per-gene symmetric bounds (v, w, v, w) from the profile caps."""
    return np.array([profile.v_max, profile.w_max, profile.v_max, profile.w_max])


@dataclass
class AgentState:
    position: np.ndarray   # (2,) in arena frame, meters
    heading: float         # rad in [0, 2*pi)
    last_sensor: int       # most recent binary line-of-sight reading


@dataclass
class WorldState:
    """Positions, headings and sensor readings of the swarm at one step.

    The per-episode random stream is consumed only at spawn; the dynamics
    themselves are noise-free.
    """

    positions: np.ndarray     # (N, 2) float64
    headings: np.ndarray      # (N,) float64 in [0, 2*pi)
    last_sensor: np.ndarray   # (N,) int8
    time_index: int
    rng: np.random.Generator

    @property
    def n_agents(self) -> int:
        return self.positions.shape[0]

    @property
    def agents(self) -> list[AgentState]:
        return [
            AgentState(self.positions[i].copy(), float(self.headings[i]), int(self.last_sensor[i]))
            for i in range(self.n_agents)
        ]


@dataclass
class Trajectory:
    """Episode record: snapshots 0..T (T = episode_steps).

    velocities[t] and sensors[t] are the commands/readings driving the
    transition t -> t+1; row T holds the final-state reading and the command
    it would select.
    """

    positions: np.ndarray    # (T+1, N, 2)
    headings: np.ndarray     # (T+1, N)
    velocities: np.ndarray   # (T+1, N, 2) commanded (v, w) pairs
    sensors: np.ndarray      # (T+1, N) int8
    profile: SimProfile
    genome: ControllerGenome | None
    seed: int | None

    @property
    def episode_steps(self) -> int:
        return self.positions.shape[0] - 1

    @property
    def n_agents(self) -> int:
        return self.positions.shape[1]


def spawn_points(profile: SimProfile) -> np.ndarray:
    """The 12-point initialization lattice, centered in the arena."""
    cx = profile.arena_width / 2.0
    cy = profile.arena_height / 2.0
    xs = cx + SPAWN_SPACING * (np.arange(SPAWN_COLS) - (SPAWN_COLS - 1) / 2.0)
    ys = cy + SPAWN_SPACING * (np.arange(SPAWN_ROWS) - (SPAWN_ROWS - 1) / 2.0)
    pts = np.array([(x, y) for y in ys for x in xs], dtype=np.float64)
    return pts


def spawn_world(profile: SimProfile, seed: int) -> WorldState:
    """Place agents on distinct lattice points with uniform random headings."""
    pts = spawn_points(profile)
    if profile.n_agents > len(pts):
        raise ConfigurationError(
            f"n_agents={profile.n_agents} exceeds the {len(pts)} spawn points"
        )
    rng = np.random.default_rng(seed)
    idx = rng.choice(len(pts), size=profile.n_agents, replace=False)
    positions = pts[idx].copy()
    headings = rng.uniform(0.0, TWO_PI, size=profile.n_agents)
    sensors = np.empty(profile.n_agents, dtype=np.int8)
    _sense_all(positions, headings, profile.body_radius, profile.sensor_range, sensors)
    return WorldState(positions, headings, sensors, 0, rng)


@njit(cache=True)
def _sense_all(pos, heading, body_r, sensor_range, out):
    """Binary line-of-sight reading per agent: 1 iff the heading ray hits
    another agent's disc with entry point within sensor_range. Walls never
    register."""
    n = pos.shape[0]
    r2 = body_r * body_r
    for i in range(n):
        ux = math.cos(heading[i])
        uy = math.sin(heading[i])
        hit = 0
        for j in range(n):
            if j == i:
                continue
            rx = pos[j, 0] - pos[i, 0]
            ry = pos[j, 1] - pos[i, 1]
            t_close = rx * ux + ry * uy
            if t_close <= 0.0:
                continue
            perp2 = rx * rx + ry * ry - t_close * t_close
            if perp2 > r2:
                continue
            chord = math.sqrt(max(r2 - perp2, 0.0))
            t_hit = t_close - chord
            if 0.0 <= t_hit <= sensor_range:
                hit = 1
                break
        out[i] = hit


@njit(cache=True)
def _resolve_collisions(pos, pos_old, body_r, mu, width, height, contact_flag):
    """Project overlapping discs to contact distance and clamp to walls.

    Friction scales the tangential part of an agent's own displacement this
    step by (1 - mu) at every contact event. Gauss-Seidel passes in fixed
    index order keep the result deterministic. contact_flag[i] is set while
    agent i touched anything this step (diagnostics).
    """
    n = pos.shape[0]
    two_r = 2.0 * body_r
    trigger = two_r - _CONTACT_EPS
    for _ in range(MAX_COLLISION_PASSES):
        corrected = False
        for i in range(n):
            for j in range(i + 1, n):
                dx = pos[j, 0] - pos[i, 0]
                dy = pos[j, 1] - pos[i, 1]
                d2 = dx * dx + dy * dy
                if d2 >= trigger * trigger:
                    continue
                d = math.sqrt(d2)
                if d < 1e-12:
                    # coincident centers: deterministic separation axis
                    ang = TWO_PI * (i * n + j) / (n * n)
                    nx = math.cos(ang)
                    ny = math.sin(ang)
                else:
                    nx = dx / d
                    ny = dy / d
                push = 0.5 * (two_r - d)
                pos[i, 0] -= nx * push
                pos[i, 1] -= ny * push
                pos[j, 0] += nx * push
                pos[j, 1] += ny * push
                if mu > 0.0:
                    # remove mu x the tangential part of each agent's own
                    # step displacement; tangent is (-ny, nx)
                    for a in (i, j):
                        sx = pos[a, 0] - pos_old[a, 0]
                        sy = pos[a, 1] - pos_old[a, 1]
                        st = -sx * ny + sy * nx
                        pos[a, 0] += mu * st * ny
                        pos[a, 1] -= mu * st * nx
                contact_flag[i] = True
                contact_flag[j] = True
                corrected = True
        for i in range(n):
            x = pos[i, 0]
            cx = min(max(x, body_r), width - body_r)
            if cx != x:
                if mu > 0.0:
                    pos[i, 1] = pos_old[i, 1] + (1.0 - mu) * (pos[i, 1] - pos_old[i, 1])
                pos[i, 0] = cx
                contact_flag[i] = True
                corrected = True
            y = pos[i, 1]
            cy = min(max(y, body_r), height - body_r)
            if cy != y:
                if mu > 0.0:
                    pos[i, 0] = pos_old[i, 0] + (1.0 - mu) * (pos[i, 0] - pos_old[i, 0])
                pos[i, 1] = cy
                contact_flag[i] = True
                corrected = True
        if not corrected:
            break
    # hard safety clamp; projection never leaves an agent outside the walls
    for i in range(n):
        pos[i, 0] = min(max(pos[i, 0], body_r), width - body_r)
        pos[i, 1] = min(max(pos[i, 1], body_r), height - body_r)


@njit(cache=True)
def _step_core(pos, heading, sensors, genome, body_r, mu, width, height, dt, vel_out, contact_flag):
    """One synchronous step: branch commands on the given sensor readings,
    Euler-integrate, then resolve collisions."""
    n = pos.shape[0]
    pos_old = pos.copy()
    for i in range(n):
        if sensors[i] == 0:
            v = genome[0]
            w = genome[1]
        else:
            v = genome[2]
            w = genome[3]
        vel_out[i, 0] = v
        vel_out[i, 1] = w
        pos[i, 0] += v * math.cos(heading[i]) * dt
        pos[i, 1] += v * math.sin(heading[i]) * dt
        th = (heading[i] + w * dt) % TWO_PI
        if th >= TWO_PI:
            th -= TWO_PI
        elif th < 0.0:
            th += TWO_PI
        heading[i] = th
        contact_flag[i] = False
    _resolve_collisions(pos, pos_old, body_r, mu, width, height, contact_flag)


@njit(cache=True)
def _run_core(pos0, heading0, genome, body_r, sensor_range, mu, width, height, dt, steps):
    n = pos0.shape[0]
    positions = np.empty((steps + 1, n, 2), dtype=np.float64)
    headings = np.empty((steps + 1, n), dtype=np.float64)
    velocities = np.empty((steps + 1, n, 2), dtype=np.float64)
    sensors = np.empty((steps + 1, n), dtype=np.int8)
    pos = pos0.copy()
    heading = heading0.copy()
    positions[0] = pos
    headings[0] = heading
    h = np.empty(n, dtype=np.int8)
    contact = np.empty(n, dtype=np.bool_)
    for t in range(steps):
        _sense_all(pos, heading, body_r, sensor_range, h)
        sensors[t] = h
        _step_core(pos, heading, h, genome, body_r, mu, width, height, dt, velocities[t], contact)
        positions[t + 1] = pos
        headings[t + 1] = heading
    _sense_all(pos, heading, body_r, sensor_range, h)
    sensors[steps] = h
    for i in range(n):
        if h[i] == 0:
            velocities[steps, i, 0] = genome[0]
            velocities[steps, i, 1] = genome[1]
        else:
            velocities[steps, i, 0] = genome[2]
            velocities[steps, i, 1] = genome[3]
    return positions, headings, velocities, sensors


def sense_line_of_sight(world: WorldState, agent_index: int, profile: SimProfile) -> int:
    """Binary reading of one agent's forward ray against the other discs."""
    if not 0 <= agent_index < world.n_agents:
        raise IndexError(f"agent_index {agent_index} out of range 0..{world.n_agents - 1}")
    out = np.empty(world.n_agents, dtype=np.int8)
    _sense_all(world.positions, world.headings, profile.body_radius, profile.sensor_range, out)
    return int(out[agent_index])


def step_world(world: WorldState, genome: ControllerGenome, profile: SimProfile) -> WorldState:
    """Advance the world one step; returns a new WorldState."""
    pos = world.positions.copy()
    heading = world.headings.copy()
    h = np.empty(world.n_agents, dtype=np.int8)
    _sense_all(pos, heading, profile.body_radius, profile.sensor_range, h)
    vel = np.empty((world.n_agents, 2), dtype=np.float64)
    contact = np.empty(world.n_agents, dtype=np.bool_)
    _step_core(
        pos, heading, h, genome.as_array(),
        profile.body_radius, profile.friction_mu,
        profile.arena_width, profile.arena_height, profile.dt,
        vel, contact,
    )
    return WorldState(pos, heading, h, world.time_index + 1, world.rng)


def run_episode(genome: ControllerGenome, profile: SimProfile, seed: int) -> Trajectory:
    """Simulate a full episode; deterministic in (genome, profile, seed)."""
    genome.validate(profile)
    world = spawn_world(profile, seed)
    positions, headings, velocities, sensors = _run_core(
        world.positions, world.headings, genome.as_array(),
        profile.body_radius, profile.sensor_range, profile.friction_mu,
        profile.arena_width, profile.arena_height, profile.dt,
        profile.episode_steps,
    )
    return Trajectory(positions, headings, velocities, sensors, profile, genome, seed)


def wall_slide_probe(profile: SimProfile, steps: int = 40) -> float:
    """Mean tangential progress per step of an agent driving 45 degrees into
    the left wall while in contact. Frictionless profiles slide; friction_mu=1
    pins the agent. Used by the ablation harness."""
    r = profile.body_radius
    pos = np.array([[r + 1e-4, profile.arena_height / 2.0]])
    heading = np.array([3.0 * math.pi / 4.0])  # up-left: into wall, +y tangent
    genome = np.array([profile.v_max, 0.0, profile.v_max, 0.0])
    h = np.zeros(1, dtype=np.int8)
    vel = np.empty((1, 2))
    contact = np.empty(1, dtype=np.bool_)
    progress = []
    for _ in range(steps):
        y_before = pos[0, 1]
        _step_core(
            pos, heading, h, genome,
            r, profile.friction_mu,
            profile.arena_width, profile.arena_height, profile.dt,
            vel, contact,
        )
        if contact[0]:
            progress.append(pos[0, 1] - y_before)
    if not progress:
        raise RuntimeError("probe agent never touched the wall; arena too large?")
    return float(np.mean(progress))
