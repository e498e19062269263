import numpy as np
import pytest

from flexbeam import metrics, solver
from flexbeam.errors import InfeasibleRegionError
from flexbeam.metrics import Weights
from flexbeam.model import ArrayGeometry, ScenarioParams, channel_matrix, generate_scenario, make_scenario, ula_positions
from flexbeam.solver import Algorithm, SolverConfig

LAM = 0.1


def geometry(n=4, region=10.0):
    return ArrayGeometry(ula_positions(n, LAM / 2), 0.0, region * LAM, LAM / 2)


def scenario(seed, n=4):
    return generate_scenario(seed, ScenarioParams(num_antennas=n))


def test_single_user_communication_only_reaches_mrt_rate():
    sc = make_scenario([([0.4, 1.9], [1.0, 0.5j])], num_antennas=3, target_gain=0.0)
    cfg = SolverConfig(power_budget=2.0, weights=Weights(1.0), algorithm=Algorithm.BF_FPA, outer_tol=1e-10)
    res = solver.solve(sc, geometry(3), cfg)
    h = channel_matrix(sc, res.positions)[:, 0]
    expected = np.log2(1 + 2.0 * np.linalg.norm(h) ** 2)
    assert res.metrics.sum_rate == pytest.approx(expected, rel=1e-6)


def test_tiny_budget_stays_finite():
    res = solver.solve(scenario(0), geometry(), SolverConfig(power_budget=1e-12))
    assert np.isfinite(res.metrics.objective)
    assert metrics.transmit_power(res.F) == pytest.approx(1e-12, rel=1e-6)


@pytest.mark.parametrize("algo", list(Algorithm))
def test_power_constraint_holds(algo):
    res = solver.solve(scenario(1), geometry(), SolverConfig(power_budget=3.0, algorithm=algo))
    assert metrics.transmit_power(res.F) <= 3.0 * (1 + 1e-8)


def test_initialize_ula_example():
    sc = scenario(2)
    F0, x0, aux = solver.initialize(sc, geometry(), SolverConfig(power_budget=2.0, initial_layout="ula"))
    np.testing.assert_allclose(x0, [0.0, 0.05, 0.10, 0.15])
    assert F0.shape == (4, sc.num_users + 1)
    np.testing.assert_allclose(np.linalg.norm(F0, axis=0) ** 2, 2.0 / F0.shape[1])
    assert np.all(aux.mu >= 0)


def test_initial_layout_must_fit():
    with pytest.raises(InfeasibleRegionError):
        # Half-wavelength spacing is below d0 here.
        solver.initial_positions(scenario(0), ArrayGeometry([0.0, 0.07, 0.14, 0.21], 0.0, 0.3, 0.07), "ula")


def test_bad_config_rejected():
    with pytest.raises(ValueError):
        SolverConfig(power_budget=0.0)
    with pytest.raises(ValueError):
        SolverConfig(initial_layout="random")


def test_fixed_array_keeps_positions():
    res = solver.solve(scenario(3), geometry(), SolverConfig(algorithm=Algorithm.BF_FPA))
    np.testing.assert_array_equal(res.positions, ula_positions(4, LAM / 2))


def test_deterministic():
    a = solver.solve(scenario(4), geometry(), SolverConfig())
    b = solver.solve(scenario(4), geometry(), SolverConfig())
    np.testing.assert_array_equal(a.positions, b.positions)
    np.testing.assert_array_equal(a.F, b.F)
    assert a.surrogate_trajectory == b.surrogate_trajectory


@pytest.mark.parametrize("algo", list(Algorithm))
def test_surrogate_trajectory_nondecreasing(algo):
    res = solver.solve(scenario(5), geometry(), SolverConfig(algorithm=algo))
    traj = np.array(res.surrogate_trajectory)
    assert np.all(np.diff(traj) >= -1e-9)
    assert res.iterations == len(traj) - 1


def test_final_surrogate_is_tight_after_aux_update():
    res = solver.solve(scenario(6), geometry(), SolverConfig())
    w = Weights(0.5)
    tight = metrics.log_objective(res.F, res.positions, scenario(6), w)
    assert metrics.surrogate(res.F, res.positions, res.aux, scenario(6), w) <= tight + 1e-9


def test_movable_array_usually_beats_fixed():
    wins = 0
    for seed in range(6):
        sc = scenario(seed)
        spga = solver.solve(sc, geometry(), SolverConfig(algorithm=Algorithm.SPGA_FBF_MA)).metrics.objective
        fpa = solver.solve(sc, geometry(), SolverConfig(algorithm=Algorithm.BF_FPA)).metrics.objective
        wins += spga >= fpa
    assert wins >= 5
