"""Contrastive training loop over a frame-stack corpus.

Paper-scale defaults are batch 1000 / 100 epochs with the lr rule
0.3 * batch / 256; the desk preset (batch 64, 10 epochs, 500 records) runs
the same loop at CPU scale. The projection head exists only here; serving
uses the 512-d encoder output.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
import torch

from .augment import AugmentParams, augment_once
from .data import load_corpus
from .loss import nt_xent
from .lars import LARS
from .model import EMBEDDING_DIM, BehaviorEncoder, preprocess

CHECKPOINT_VERSION = 1


@dataclass
class TrainConfig:
    temperature: float = 0.5
    batch_size: int = 1000
    epochs: int = 100
    weight_decay: float = 1.5e-7
    projection_dim: int = 128
    embedding_dim: int = EMBEDDING_DIM
    augment: AugmentParams = field(default_factory=AugmentParams)
    optimizer: str = "lars"          # or "sgd" (same lr rule)
    momentum: float = 0.9
    pretrained: bool = False         # ImageNet trunk init needs a download
    seed: int = 0

    @property
    def learning_rate(self) -> float:
        return 0.3 * self.batch_size / 256.0

    def __post_init__(self):
        if self.temperature <= 0:
            raise ValueError("temperature must be > 0")
        if self.embedding_dim != EMBEDDING_DIM:
            raise ValueError(f"encoder output is fixed at {EMBEDDING_DIM}")
        if self.optimizer not in ("lars", "sgd"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")


def desk_config(**overrides) -> TrainConfig:
    """CPU-scale preset: batch 64, 10 epochs (dataset ~500 records)."""
    base = dict(batch_size=64, epochs=10)
    base.update(overrides)
    return TrainConfig(**base)


def _make_optimizer(model: torch.nn.Module, config: TrainConfig):
    if config.optimizer == "lars":
        return LARS(model.parameters(), lr=config.learning_rate,
                    momentum=config.momentum, weight_decay=config.weight_decay)
    return torch.optim.SGD(model.parameters(), lr=config.learning_rate,
                           momentum=config.momentum, weight_decay=config.weight_decay)


def train(dataset_path, config: TrainConfig, checkpoint_path=None,
          log=print) -> dict:
    """Train the encoder; returns the checkpoint dict (also saved if a path
    is given). The checkpoint carries the config and per-epoch mean losses."""
    header, stacks = load_corpus(dataset_path)
    if header.record_count < 2:
        raise ValueError(f"need at least 2 records to contrast, got {header.record_count}")
    torch.manual_seed(config.seed)
    rng = np.random.default_rng(config.seed)
    model = BehaviorEncoder(config.projection_dim, pretrained=config.pretrained)
    model.train()
    optimizer = _make_optimizer(model, config)

    n = stacks.shape[0]
    batch = min(config.batch_size, n)
    epoch_losses = []
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        losses = []
        for start in range(0, n - batch + 1, batch):
            idx = order[start:start + batch]
            views = np.empty((2 * len(idx), *stacks.shape[1:]), dtype=np.uint8)
            for row, i in enumerate(idx):
                views[2 * row] = augment_once(stacks[i], rng, config.augment)
                views[2 * row + 1] = augment_once(stacks[i], rng, config.augment)
            x = preprocess(views)
            z = model(x)
            loss = nt_xent(z, config.temperature)
            optimizer.zero_grad(set_to_none=True)
            loss.backward()
            optimizer.step()
            losses.append(float(loss.detach()))
        epoch_losses.append(float(np.mean(losses)))
        log(f"epoch {epoch + 1}/{config.epochs}: mean loss {epoch_losses[-1]:.4f}")

    model.eval()
    checkpoint = {
        "format_version": CHECKPOINT_VERSION,
        "config": _config_dict(config),
        "input_shape": (header.channels, header.height, header.width),
        "encoder_state": model.trunk.state_dict(),
        "projection_state": model.projection.state_dict(),
        "epoch_losses": epoch_losses,
    }
    if checkpoint_path is not None:
        torch.save(checkpoint, checkpoint_path)
    return checkpoint


def _config_dict(config: TrainConfig) -> dict:
    d = asdict(config)
    d["augment"]["crop_scale"] = list(d["augment"]["crop_scale"])
    d["augment"]["rotations"] = list(d["augment"]["rotations"])
    return d


def load_checkpoint(path) -> tuple[BehaviorEncoder, dict]:
    checkpoint = torch.load(path, map_location="cpu", weights_only=False)
    if checkpoint.get("format_version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {checkpoint.get('format_version')}")
    model = BehaviorEncoder(checkpoint["config"]["projection_dim"])
    model.trunk.load_state_dict(checkpoint["encoder_state"])
    model.projection.load_state_dict(checkpoint["projection_state"])
    model.eval()
    return model, checkpoint
