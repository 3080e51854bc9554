"""Greyscale rasterization of world states and episode frame stacks.

The arena rectangle maps onto the full frame (anisotropic scale). Agents are
filled discs of body_radius in arena units, drawn with 2x supersampled
box-filter anti-aliasing: background 0, body 255, boundary values in between.
Row 0 corresponds to y = 0 in the arena frame.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .profiles import SimProfile
from .sim import Trajectory, WorldState

SUPERSAMPLE = 2


@dataclass(frozen=True)
class FrameStack:
    """Three greyscale frames summarizing an episode's converged second half."""

    channels: np.ndarray          # (3, height, width) uint8
    step_indices: tuple[int, int, int]

    @property
    def height(self) -> int:
        return self.channels.shape[1]

    @property
    def width(self) -> int:
        return self.channels.shape[2]


def rasterize_positions(
    positions: np.ndarray, profile: SimProfile, width: int = 64, height: int = 64
) -> np.ndarray:
    """Draw agent discs at the given (N, 2) arena positions into a uint8 frame."""
    if width < 8 or height < 8:
        raise ValueError(f"frame size must be at least 8x8, got {width}x{height}")
    ss = SUPERSAMPLE
    sw, sh = width * ss, height * ss
    # supersample pixel centers in arena coordinates
    px = profile.arena_width / sw
    py = profile.arena_height / sh
    mask = np.zeros((sh, sw), dtype=bool)
    r = profile.body_radius
    r2 = r * r
    for ax, ay in np.asarray(positions, dtype=np.float64).reshape(-1, 2):
        # restrict work to the disc's bounding box in supersample pixels
        c0 = max(int((ax - r) / px), 0)
        c1 = min(int((ax + r) / px) + 2, sw)
        r0 = max(int((ay - r) / py), 0)
        r1 = min(int((ay + r) / py) + 2, sh)
        if c0 >= c1 or r0 >= r1:
            continue
        xs = (np.arange(c0, c1) + 0.5) * px - ax
        ys = (np.arange(r0, r1) + 0.5) * py - ay
        mask[r0:r1, c0:c1] |= ys[:, None] ** 2 + xs[None, :] ** 2 <= r2
    shade = mask.reshape(height, ss, width, ss).mean(axis=(1, 3)) * 255.0
    return np.rint(shade).astype(np.uint8)


def rasterize(world: WorldState, width: int, height: int, profile: SimProfile) -> np.ndarray:
    return rasterize_positions(world.positions, profile, width, height)


def subsample_indices(episode_steps: int) -> tuple[int, int, int]:
    """Channel snapshot indices: floor(T/2), floor(3T/4), T-1."""
    t = episode_steps
    return (t // 2, min(3 * t // 4, t - 1), t - 1)


def subsample(traj: Trajectory, width: int = 64, height: int = 64) -> FrameStack:
    """Build the 3-channel behavior summary from an episode's second half."""
    t = traj.episode_steps
    if t < 2:
        raise ValueError(f"episode_steps must be >= 2 to subsample, got {t}")
    idx = subsample_indices(t)
    channels = np.stack(
        [rasterize_positions(traj.positions[i], traj.profile, width, height) for i in idx]
    )
    return FrameStack(channels, idx)


def write_pgm(frame: np.ndarray, path) -> None:
    """Write one greyscale frame as a binary PGM (P5) image."""
    frame = np.asarray(frame, dtype=np.uint8)
    h, w = frame.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(frame.tobytes())
