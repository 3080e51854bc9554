"""Encoder and projection head.

A ResNet18 trunk with its classification layer removed is the encoder (512-d
output, the representation used downstream); a 2-layer MLP projects to the
128-d space where the contrastive loss is applied during training only.
"""

from __future__ import annotations

import torch
from torch import nn
from torchvision.models import resnet18

EMBEDDING_DIM = 512


class BehaviorEncoder(nn.Module):
    def __init__(self, projection_dim: int = 128, pretrained: bool = False):
        super().__init__()
        self.trunk = resnet18(weights="IMAGENET1K_V1" if pretrained else None)
        self.trunk.fc = nn.Identity()
        self.projection = nn.Sequential(
            nn.Linear(EMBEDDING_DIM, EMBEDDING_DIM),
            nn.ReLU(inplace=True),
            nn.Linear(EMBEDDING_DIM, projection_dim),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """Projection-space output (training path)."""
        return self.projection(self.trunk(x))

    def embed(self, x: torch.Tensor) -> torch.Tensor:
        """Encoder-space output (serving path), (n, 512)."""
        return self.trunk(x)


def preprocess(frames) -> torch.Tensor:
    """uint8 (n, c, h, w) or (c, h, w) -> float32 in [0, 1]."""
    x = torch.as_tensor(frames)
    if x.dim() == 3:
        x = x.unsqueeze(0)
    return x.float() / 255.0
