"""Stochastic view augmentation: square crop, horizontal flip, right-angle
rotation. One parameter draw transforms all channels of a stack identically;
a pair of independent draws gives the two contrastive views.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
import torch.nn.functional as F


@dataclass(frozen=True)
class AugmentParams:
    crop_scale: tuple[float, float] = (0.6, 1.0)   # area fraction, 1:1 aspect
    flip_prob: float = 0.5
    rotations: tuple[int, ...] = (0, 90, 180, 270)

    def __post_init__(self):
        lo, hi = self.crop_scale
        if not 0.0 < lo <= hi <= 1.0:
            raise ValueError(f"crop_scale must be within (0, 1], got {self.crop_scale}")
        if any(r % 90 for r in self.rotations):
            raise ValueError("rotations must be multiples of 90 degrees")


def _resize(frames: np.ndarray, size: int) -> np.ndarray:
    """Bilinear resize of a (c, s, s) uint8 crop back to (c, size, size)."""
    x = torch.from_numpy(frames).unsqueeze(0).float()
    out = F.interpolate(x, size=(size, size), mode="bilinear", align_corners=False)
    return out.squeeze(0).round_().clamp_(0, 255).byte().numpy()


def augment_once(stack: np.ndarray, rng: np.random.Generator,
                 params: AugmentParams = AugmentParams()) -> np.ndarray:
    """One sampled crop/flip/rotation applied to every channel of a stack."""
    c, h, w = stack.shape
    if h != w:
        raise ValueError(f"stacks must be square, got {h}x{w}")
    scale = rng.uniform(*params.crop_scale)
    side = max(int(round(h * np.sqrt(scale))), 1)
    side = min(side, h)
    top = int(rng.integers(0, h - side + 1))
    left = int(rng.integers(0, w - side + 1))
    out = stack[:, top:top + side, left:left + side]
    if side != h:
        out = _resize(out, h)
    else:
        out = out.copy()
    if rng.random() < params.flip_prob:
        out = out[:, :, ::-1]
    quarter_turns = int(params.rotations[rng.integers(0, len(params.rotations))]) // 90
    if quarter_turns:
        out = np.rot90(out, k=quarter_turns, axes=(1, 2))
    return np.ascontiguousarray(out)


def augment_pair(stack: np.ndarray, rng: np.random.Generator,
                 params: AugmentParams = AugmentParams()) -> tuple[np.ndarray, np.ndarray]:
    """Two independent augmentations of the same stack."""
    return augment_once(stack, rng, params), augment_once(stack, rng, params)
