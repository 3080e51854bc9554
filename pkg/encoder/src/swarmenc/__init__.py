"""Contrastive behavior encoder: training and embedding service."""

__version__ = "0.1.0"

from .augment import AugmentParams, augment_once, augment_pair
from .loss import nt_xent
from .model import EMBEDDING_DIM, BehaviorEncoder, preprocess
from .train import TrainConfig, desk_config, load_checkpoint, train

__all__ = [
    "AugmentParams",
    "BehaviorEncoder",
    "EMBEDDING_DIM",
    "TrainConfig",
    "augment_once",
    "augment_pair",
    "desk_config",
    "load_checkpoint",
    "nt_xent",
    "preprocess",
    "train",
]
