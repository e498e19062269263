import numpy as np
import pytest
from conftest import random_instance
from hypothesis import given, settings
from hypothesis import strategies as st

from flexbeam import metrics
from flexbeam.fp_core import AuxiliaryState, aux_fixed_point
from flexbeam.metrics import Weights
from flexbeam.model import (
    channel_matrix,
    clutter_steering,
    make_scenario,
    steering_vector,
    target_steering,
    user_channel,
)

BROADSIDE = np.pi / 2


def test_weights_sum_to_one():
    w = Weights(0.3)
    assert w.comm + w.sense == 1.0
    with pytest.raises(ValueError):
        Weights(1.5)


def test_sinr_without_interference_equals_power():
    sc = make_scenario([([BROADSIDE], [1.0])], num_antennas=1)
    F = np.array([[np.sqrt(7.0), 0.0]])
    assert metrics.sinr(0, F, sc, [0.0]) == pytest.approx(7.0)


def test_orthogonal_interference_is_harmless():
    # h = [1, 0] is produced by two opposite-phase paths only at special
    # positions, so build it as a one-antenna-active channel via N=2 endfire.
    sc = make_scenario([([0.0, np.pi], [0.5, 0.5])], num_antennas=2)
    x = np.array([0.0, 0.025])  # endfire phases j and -j cancel at antenna 2
    h = user_channel(sc, 0, x)
    np.testing.assert_allclose(h, [1, 0], atol=1e-15)
    F = np.array([[1, 0], [0, 5]], dtype=complex)
    assert metrics.sinr(0, F, sc, x) == pytest.approx(1.0)


def test_sinr_matches_direct_formula():
    sc, x, F = random_instance(3, N=4, K=2, C=1)
    H = channel_matrix(sc, x)
    for k in range(2):
        h = H[:, k]
        terms = [abs(np.vdot(h, F[:, j])) ** 2 for j in range(3)]
        ref = terms[k] / (sum(terms) - terms[k] + sc.user_noise[k])
        assert metrics.sinr(k, F, sc, x) == pytest.approx(ref, rel=1e-12)
    np.testing.assert_allclose(metrics.all_sinr(F, sc, x), [metrics.sinr(k, F, sc, x) for k in range(2)], rtol=1e-12)


def test_sinr_index_error():
    sc, x, F = random_instance(0, K=2)
    with pytest.raises(IndexError):
        metrics.sinr(2, F, sc, x)


def test_scnr_without_clutter():
    sc = make_scenario([([1.0], [1.0])], num_antennas=2, target_gain=1.0, target_angle=0.9)
    x = np.array([0.0, 0.03])
    f = np.array([[0.3 + 0.1j, 0.0], [-0.2j, 0.0]])
    a = steering_vector(x, 0.9, 0.1)
    assert metrics.scnr(f, sc, x) == pytest.approx(abs(np.vdot(a, f[:, 0])) ** 2)


def test_scnr_of_zero_beamformer():
    sc, x, F = random_instance(0, C=3)
    assert metrics.scnr(np.zeros_like(F), sc, x) == 0.0


def test_scnr_matches_direct_formula():
    sc, x, F = random_instance(9, N=4, K=2, C=3)
    a_s = target_steering(sc, x)
    A_c = clutter_steering(sc, x)
    num = np.linalg.norm(sc.target_gain * (a_s.conj() @ F)) ** 2
    den = sum(np.linalg.norm(sc.clutter_gains[c] * (A_c[:, c].conj() @ F)) ** 2 for c in range(3))
    assert metrics.scnr(F, sc, x) == pytest.approx(num / (den + sc.sensing_noise), rel=1e-12)


def test_objective_of_zero_beamformer():
    sc, x, F = random_instance(1)
    assert metrics.objective(np.zeros_like(F), x, sc, Weights(0.5)) == 0.0


def test_objective_with_sensing_only():
    sc, x, F = random_instance(2)
    expected = np.log2(1 + metrics.scnr(F, sc, x))
    assert metrics.objective(F, x, sc, Weights(0.0)) == expected


def test_objective_single_user_three_snr():
    sc = make_scenario([([BROADSIDE], [1.0])], num_antennas=1, target_gain=0.0)
    F = np.array([[np.sqrt(3.0), 0.0]])
    assert metrics.objective(F, [0.0], sc, Weights(0.25)) == pytest.approx(0.5)


@given(st.integers(0, 10**6), st.lists(st.floats(0, 2 * np.pi), min_size=3, max_size=3))
@settings(max_examples=40)
def test_objective_ignores_column_phases(seed, phases):
    sc, x, F = random_instance(seed % 1000, K=2, C=2)
    w = Weights(0.6)
    rotated = F * np.exp(1j * np.array(phases))
    assert metrics.objective(rotated, x, sc, w) == pytest.approx(metrics.objective(F, x, sc, w), rel=1e-12)


def test_objective_grows_with_own_signal():
    # The user's channel only sees antenna 1; the interferer lives on antenna 2.
    sc = make_scenario([([0.0, np.pi], [0.5, 0.5])], num_antennas=2)
    x = np.array([0.0, 0.025])
    values = []
    for scale in (0.5, 1.0, 2.0, 4.0):
        F = np.array([[scale, 0.0], [0.0, 1.0]], dtype=complex)
        values.append(metrics.objective(F, x, sc, Weights(1.0)))
    assert values == sorted(values)


def test_report_is_consistent():
    sc, x, F = random_instance(4, K=3, C=2)
    w = Weights(0.3)
    r = metrics.report(F, x, sc, w)
    assert r.objective == pytest.approx(w.comm * r.sum_rate + w.sense * r.sensing_mi, abs=1e-12)
    assert np.all(r.sinr >= 0) and r.scnr >= 0
    assert metrics.log_objective(F, x, sc, w) == pytest.approx(r.objective * np.log(2), rel=1e-12)


def test_transmit_power():
    assert metrics.transmit_power(np.array([[1, 1j], [2, 0]])) == pytest.approx(6.0)


def test_surrogate_zero_aux_is_zero():
    sc, x, F = random_instance(5, K=2, C=1)
    assert metrics.surrogate(F, x, AuxiliaryState.zeros(2), sc, Weights(0.5)) == 0.0


def test_surrogate_rejects_negative_mu():
    sc, x, F = random_instance(5, K=2)
    aux = AuxiliaryState.zeros(2)
    bad = type("Aux", (), {"mu": -np.ones(3), "xi_c": aux.xi_c, "xi_s": aux.xi_s})
    with pytest.raises(ValueError):
        metrics.surrogate(F, x, bad, sc, Weights(0.5))


def test_surrogate_is_tight_at_optimal_aux():
    sc, x, F = random_instance(6, K=3, C=3)
    w = Weights(0.4)
    aux = aux_fixed_point(F, x, sc, w)
    tight = metrics.log_objective(F, x, sc, w)
    assert metrics.surrogate(F, x, aux, sc, w) == pytest.approx(tight, rel=1e-9)
    assert tight / np.log(2) == pytest.approx(metrics.objective(F, x, sc, w), rel=1e-12)


def test_surrogate_lower_bounds_objective():
    sc, x, F = random_instance(7, K=3, C=2)
    w = Weights(0.5)
    aux = aux_fixed_point(F, x, sc, w)
    tight = metrics.log_objective(F, x, sc, w)
    rng = np.random.default_rng(0)
    for _ in range(100):
        scale = rng.uniform(0.01, 0.5)
        mu = np.maximum(aux.mu + scale * rng.standard_normal(4), 0.0)
        xi_c = aux.xi_c + scale * (rng.standard_normal(3) + 1j * rng.standard_normal(3))
        xi_s = aux.xi_s + scale * (rng.standard_normal(4) + 1j * rng.standard_normal(4))
        assert metrics.surrogate(F, x, AuxiliaryState(mu, xi_c, xi_s), sc, w) <= tight + 1e-12
