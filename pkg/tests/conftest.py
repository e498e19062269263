import numpy as np
import pytest

from flexbeam.metrics import Weights
from flexbeam.model import ScenarioParams, generate_scenario


def random_instance(seed, N=4, K=2, C=1, scale=1.0):
    """Scenario, sorted positions in [0, 1] m, and a random beamformer."""
    rng = np.random.default_rng(seed)
    sc = generate_scenario(seed, ScenarioParams(num_users=K, num_clutters=C, num_antennas=N))
    x = np.sort(rng.uniform(0.0, 1.0, N))
    F = scale * (rng.standard_normal((N, K + 1)) + 1j * rng.standard_normal((N, K + 1)))
    return sc, x, F


@pytest.fixture
def weights():
    return Weights(0.5)
