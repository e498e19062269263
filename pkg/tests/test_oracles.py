import numpy as np
import pytest
from conftest import random_instance

from flexbeam import fp_core, metrics, oracles
from flexbeam.errors import UnsupportedSizeError
from flexbeam.fp_core import AuxiliaryState
from flexbeam.metrics import Weights
from flexbeam.model import ArrayGeometry, make_scenario


def test_fd_gradient_of_quadratic():
    f = lambda x: x[0] ** 2 + 3 * x[0] * x[1]
    np.testing.assert_allclose(oracles.fd_gradient(f, [1.0, 2.0]), [8.0, 3.0], atol=1e-8)


def test_fd_gradient_of_sine():
    g = oracles.fd_gradient(lambda x: np.sin(x[0]), [0.3], oracles.FDConfig(step=1e-5))
    assert g[0] == pytest.approx(np.cos(0.3), abs=1e-9)


def test_fd_step_validated():
    with pytest.raises(ValueError):
        oracles.FDConfig(step=0.0)


@pytest.mark.parametrize("seed", range(3))
def test_oracle_surrogate_matches_library(seed, weights):
    sc, x, F = random_instance(seed, C=2)
    aux = fp_core.initial_aux(F, x, sc, weights)
    t = oracles._terms(sc, F, x)
    ours = float(oracles._surrogate_from_terms(t, aux.mu, aux.xi_c, aux.xi_s, weights))
    assert ours == pytest.approx(metrics.surrogate(F, x, aux, sc, weights), rel=1e-12)


def _single(n):
    return make_scenario([([0.7, 2.1], [1.0, -0.4j])], num_antennas=n, clutter_angles=[1.2], clutter_gains=[0.3])


def test_exhaustive_single_antenna_matches_scan(weights):
    sc = _single(1)
    F = np.array([[1.0 + 0.5j, 0.3]])
    aux = fp_core.initial_aux(F, [0.0], sc, weights)
    geo = ArrayGeometry([0.0], 0.0, 0.3, 0.05)
    x, best = oracles.exhaustive_positions(sc, F, aux, weights, geo, 0.01)
    grid = np.linspace(0.0, 0.3, 31)
    values = [metrics.surrogate(F, [g], aux, sc, weights) for g in grid]
    assert x[0] == pytest.approx(grid[int(np.argmax(values))])
    assert best == pytest.approx(max(values), rel=1e-12)


def test_exhaustive_two_antennas_respects_spacing(weights):
    sc = _single(2)
    F = np.array([[1.0, 0.2j], [0.5j, 1.0]])
    aux = fp_core.initial_aux(F, [0.0, 0.1], sc, weights)
    geo = ArrayGeometry([0.0, 0.1], 0.0, 0.4, 0.1)
    x, best = oracles.exhaustive_positions(sc, F, aux, weights, geo, 0.02)
    assert abs(x[1] - x[0]) >= 0.1 - 1e-12
    assert best == pytest.approx(metrics.surrogate(F, x, aux, sc, weights), rel=1e-12)


def test_exhaustive_rejects_large_arrays(weights):
    sc, x, F = random_instance(0, N=3)
    aux = fp_core.initial_aux(F, x, sc, weights)
    with pytest.raises(UnsupportedSizeError):
        oracles.exhaustive_positions(sc, F, aux, weights, ArrayGeometry(x, 0.0, 1.0, 0.01), 0.1)


def test_exhaustive_with_no_feasible_tuple(weights):
    sc = _single(2)
    F = np.ones((2, 2), dtype=complex)
    aux = fp_core.initial_aux(F, [0.0, 0.1], sc, weights)
    geo = ArrayGeometry([0.0, 0.1], 0.0, 0.2, 0.1)
    # A step wider than the region leaves a single grid point.
    with pytest.raises(UnsupportedSizeError):
        oracles.exhaustive_positions(sc, F, aux, weights, geo, 0.3)


def test_numeric_aux_zero_beamformer(weights):
    sc, x, _ = random_instance(1)
    F = np.zeros((4, 3), dtype=complex)
    aux = oracles.numeric_aux_maximizer(F, x, sc, weights)
    np.testing.assert_allclose(aux.mu, 0.0, atol=1e-9)
    np.testing.assert_allclose(aux.xi_c, 0.0, atol=1e-9)
    np.testing.assert_allclose(aux.xi_s, 0.0, atol=1e-9)


def test_numeric_aux_scalar_case():
    # One antenna, one user, no sensing weight: h^H f = 1, noise 1.
    sc = make_scenario([([np.pi / 2], [1.0])], num_antennas=1, target_gain=0.0)
    F = np.array([[1.0, 0.0]], dtype=complex)
    w = Weights(1.0)
    aux = oracles.numeric_aux_maximizer(F, [0.0], sc, w)
    assert aux.mu[0] == pytest.approx(1.0, abs=1e-6)  # SINR
    # xi = sqrt(1+mu) h^H f / received power = sqrt(2) / 2.
    assert aux.xi_c[0] == pytest.approx(np.sqrt(2) / 2, abs=1e-6)


@pytest.mark.parametrize("seed", range(2))
def test_numeric_aux_agrees_with_closed_form(seed, weights):
    sc, x, F = random_instance(seed + 10, K=2, C=1)
    ref = fp_core.aux_fixed_point(F, x, sc, weights)
    num = oracles.numeric_aux_maximizer(F, x, sc, weights)
    assert isinstance(num, AuxiliaryState)
    np.testing.assert_allclose(num.mu, ref.mu, rtol=1e-6, atol=1e-6)
    np.testing.assert_allclose(num.xi_c, ref.xi_c, rtol=1e-6, atol=1e-6)
