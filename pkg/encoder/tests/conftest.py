import numpy as np
import pytest
import torch

from swarmbd.dataset import generate_dataset
from swarmbd.profiles import get_profile

from swarmenc.model import BehaviorEncoder
from swarmenc.train import CHECKPOINT_VERSION, _config_dict, desk_config

torch.set_num_threads(2)


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    """64 fast records; content quality does not matter for plumbing tests."""
    path = tmp_path_factory.mktemp("data") / "small.swbd"
    profile = get_profile("rsrs").with_overrides(episode_steps=60)
    generate_dataset(64, profile, seed=5, path=path)
    return path


@pytest.fixture(scope="session")
def train_corpus(tmp_path_factory):
    """The desk-scale 500-record training corpus (full-length episodes)."""
    path = tmp_path_factory.mktemp("data") / "train500.swbd"
    generate_dataset(500, get_profile("rsrs"), seed=77, path=path)
    return path


@pytest.fixture(scope="session")
def heldout_corpus(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "held50.swbd"
    generate_dataset(50, get_profile("rsrs"), seed=991, path=path)
    return path


@pytest.fixture(scope="session")
def random_checkpoint(tmp_path_factory):
    """Untrained encoder checkpoint; enough for protocol/serving tests."""
    torch.manual_seed(1234)
    model = BehaviorEncoder()
    path = tmp_path_factory.mktemp("ckpt") / "random.pt"
    torch.save({
        "format_version": CHECKPOINT_VERSION,
        "config": _config_dict(desk_config()),
        "input_shape": (3, 64, 64),
        "encoder_state": model.trunk.state_dict(),
        "projection_state": model.projection.state_dict(),
        "epoch_losses": [],
    }, path)
    return path


def random_stack(seed=0, shape=(3, 64, 64)):
    rng = np.random.default_rng(seed)
    return rng.integers(0, 256, shape).astype(np.uint8)
