import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_unit_quaternion(rng):
    q = rng.normal(size=4)
    return q / np.linalg.norm(q)


def random_pose(rng, translation_scale=1.0):
    """Random unit dual quaternion pose, built through the oracle route."""
    from _oracles import make_pose_oracle

    q = random_unit_quaternion(rng)
    l = translation_scale * rng.normal(size=3)
    return make_pose_oracle(q, l)


def random_twist(rng, scale=1.0):
    return scale * rng.normal(size=6)
