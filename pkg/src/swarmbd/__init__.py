"""Swarm behavior discovery.

Simulates swarms of differential-drive, line-of-sight-sensing robots under
calibrated or default physics profiles, represents emergent behaviors with
hand-crafted metrics or learned embeddings served over a wire protocol, and
explores the controller space with novelty-driven evolution.
"""

__version__ = "0.1.0"

from .medoids import k_medoids
from .metrics import (
    BehaviorVector,
    HandcraftedMetrics,
    MetricsBackend,
    behavior_distance,
    handcrafted_embed,
)
from .profiles import BUILTIN_PROFILES, ConfigurationError, SimProfile, get_profile
from .search import NoveltyArchive, SearchConfig, novelty, run_discovery
from .sim import ControllerGenome, Trajectory, WorldState, run_episode, spawn_world

__all__ = [
    "BUILTIN_PROFILES",
    "BehaviorVector",
    "ConfigurationError",
    "ControllerGenome",
    "HandcraftedMetrics",
    "MetricsBackend",
    "NoveltyArchive",
    "SearchConfig",
    "SimProfile",
    "Trajectory",
    "WorldState",
    "behavior_distance",
    "get_profile",
    "handcrafted_embed",
    "k_medoids",
    "novelty",
    "run_discovery",
    "run_episode",
    "spawn_world",
]
