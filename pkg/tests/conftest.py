import numpy as np
import pytest

from swarmbd.profiles import get_profile


@pytest.fixture(scope="session")
def rsrs():
    return get_profile("rsrs")


@pytest.fixture(scope="session")
def default():
    return get_profile("default")


def assert_world_equal(a, b):
    assert np.array_equal(a.positions, b.positions)
    assert np.array_equal(a.headings, b.headings)
    assert np.array_equal(a.last_sensor, b.last_sensor)
    assert a.time_index == b.time_index


def assert_trajectory_equal(a, b):
    assert np.array_equal(a.positions, b.positions)
    assert np.array_equal(a.headings, b.headings)
    assert np.array_equal(a.velocities, b.velocities)
    assert np.array_equal(a.sensors, b.sensors)
