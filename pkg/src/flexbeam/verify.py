"""Self-checks that pit the fast path against the oracles.

Each ``check_*`` returns a :class:`CheckResult`; the CLI ``verify`` command
and the acceptance tests both run them.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import fp_core, metrics, oracles, position_opt, solver
from .metrics import Weights
from .model import ArrayGeometry, ScenarioParams, generate_scenario, positions_feasible, ula_positions


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail} ({self.seconds:.1f}s)"


def _timed(fn):
    def wrapper(*args, **kwargs):
        start = time.perf_counter()
        result = fn(*args, **kwargs)
        result.seconds = time.perf_counter() - start
        return result

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _random_instance(seed, n_choices=(2, 4), k_choices=(1, 4), c_choices=(0, 3)):
    rng = np.random.default_rng([7, seed])
    N = int(rng.choice(n_choices))
    K = int(rng.choice(k_choices))
    C = int(rng.choice(c_choices))
    sc = generate_scenario(seed, ScenarioParams(num_users=K, num_clutters=C, num_antennas=N))
    x = np.sort(rng.uniform(0.0, 1.0, N))
    F = (rng.standard_normal((N, K + 1)) + 1j * rng.standard_normal((N, K + 1))) * rng.uniform(0.2, 3.0)
    w = Weights(float(rng.uniform(0.1, 0.9)))
    return sc, x, F, w, rng


@_timed
def check_tightness(instances=100, tol=1e-8) -> CheckResult:
    worst = 0.0
    for seed in range(instances):
        sc, x, F, w, _ = _random_instance(seed)
        aux = fp_core.aux_fixed_point(F, x, sc, w)
        tight = metrics.log_objective(F, x, sc, w)
        worst = max(worst, abs(metrics.surrogate(F, x, aux, sc, w) - tight) / abs(tight))
    return CheckResult("surrogate tightness", worst <= tol, f"max relative gap {worst:.2e} over {instances} instances")


@_timed
def check_bisection(instances=100) -> CheckResult:
    rng = np.random.default_rng(11)
    worst_power = worst_stat = worst_slack = 0.0
    for _ in range(instances):
        N = int(rng.integers(2, 7))
        J = int(rng.integers(1, 6))
        A = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
        lam = A @ A.conj().T + 0.1 * np.eye(N)
        phi = rng.standard_normal((N, J)) + 1j * rng.standard_normal((N, J))
        unconstrained = np.linalg.solve(lam, phi)
        P0 = 0.3 * metrics.transmit_power(unconstrained)
        F, lmbda = fp_core.beamformer_update(fp_core.QuadraticForm(lam, phi), P0)
        worst_power = max(worst_power, abs(metrics.transmit_power(F) - P0) / (1e-8 * P0))
        worst_stat = max(worst_stat, float(np.linalg.norm((lam + lmbda * np.eye(N)) @ F - phi)))
        worst_slack = max(worst_slack, abs(lmbda * (metrics.transmit_power(F) - P0)))
    F, lmbda = fp_core.beamformer_update(
        fp_core.QuadraticForm(np.eye(2, dtype=complex), np.array([[2, 0], [0, 0]], dtype=complex)), 1.0
    )
    iso = max(abs(lmbda - 1.0), float(np.max(np.abs(F - np.array([[1, 0], [0, 0]])))))
    ok = worst_power <= 1.0 and worst_stat <= 1e-8 and worst_slack <= 1e-6 and iso <= 1e-8
    detail = (f"power excess {worst_power:.2f} eps, stationarity {worst_stat:.1e}, "
              f"slackness {worst_slack:.1e}, isotropic error {iso:.1e}")
    return CheckResult("KKT bisection", ok, detail)


@_timed
def check_gradient(instances=100, rel_tol=1e-5, floor=1e-10) -> CheckResult:
    worst = 0.0
    for seed in range(instances):
        sc, x, F, w, _ = _random_instance(seed, n_choices=(2, 3, 4, 6))
        aux = fp_core.initial_aux(F, x, sc, w)
        g = position_opt.surrogate_gradient(x, F, aux, sc, w)
        fd = oracles.fd_gradient(lambda z: metrics.surrogate(F, z, aux, sc, w), x)
        mask = np.abs(g) >= floor
        if mask.any():
            worst = max(worst, float(np.max(np.abs(g - fd)[mask] / np.abs(g)[mask])))
    return CheckResult("position gradient", worst < rel_tol, f"max relative error {worst:.2e} over {instances} instances")


@_timed
def check_projection() -> CheckResult:
    geo = ArrayGeometry(np.zeros(3), 0.0, 0.5, 0.05)
    a = position_opt.project_positions([-0.1, 0.0, 0.02], geo).positions
    geo4 = ArrayGeometry(np.zeros(4), 0.0, 0.5, 0.05)
    b = position_opt.project_positions([0.3] * 4, geo4).positions
    ex1 = np.allclose(a, [0.0, 0.05, 0.10], rtol=0, atol=1e-15)
    ex2 = np.allclose(b, [0.3, 0.35, 0.40, 0.45], rtol=0, atol=1e-15)
    rng = np.random.default_rng(3)
    feasible = idempotent = True
    for _ in range(200):
        N = int(rng.integers(1, 8))
        d0 = float(rng.uniform(0.01, 0.1))
        span = N * d0 * float(rng.uniform(1.0, 3.0))
        g = ArrayGeometry(np.zeros(N), 0.0, span, d0)
        p = position_opt.project_positions(rng.uniform(-0.5, span + 0.5, N), g).positions
        feasible &= positions_feasible(p, 0.0, span, d0)
        idempotent &= np.array_equal(position_opt.project_positions(p, g).positions, p)
    ok = ex1 and ex2 and feasible and idempotent
    return CheckResult("projection", bool(ok), f"examples {ex1 and ex2}, feasible {feasible}, idempotent {idempotent}")


@_timed
def check_monotone(solves=20, slack=1e-9, power_dbm=30.0) -> CheckResult:
    worst = 0.0
    lam = 0.1
    for algo in solver.Algorithm:
        for seed in range(solves):
            sc = generate_scenario(seed, ScenarioParams(num_antennas=4))
            geo = ArrayGeometry(ula_positions(4, lam / 2), 0.0, 10 * lam, lam / 2)
            cfg = solver.SolverConfig(power_budget=10 ** ((power_dbm - 30) / 10), algorithm=algo)
            traj = np.array(solver.solve(sc, geo, cfg).surrogate_trajectory)
            worst = max(worst, float(np.max(traj[:-1] - traj[1:], initial=0.0)))
    return CheckResult("monotone outer loop", worst <= slack, f"largest decrease {worst:.1e} over {3 * solves} solves")


@_timed
def check_aux_oracle(instances=50, tol=1e-6) -> CheckResult:
    worst = 0.0
    for seed in range(instances):
        sc, x, F, w, _ = _random_instance(1000 + seed)
        ref = fp_core.aux_fixed_point(F, x, sc, w)
        num = oracles.numeric_aux_maximizer(F, x, sc, w)
        gap = max(
            float(np.max(np.abs(num.mu - ref.mu) / np.maximum(1.0, ref.mu))),
            float(np.max(np.abs(num.xi_c - ref.xi_c) / np.maximum(1.0, np.abs(ref.xi_c)))),
            float(np.max(np.abs(num.xi_s - ref.xi_s) / np.maximum(1.0, np.abs(ref.xi_s)))),
        )
        worst = max(worst, gap)
    return CheckResult("closed-form auxiliaries", worst <= tol, f"max deviation from numeric search {worst:.1e}")


def spga_vs_exhaustive(seed, lam=0.1, region=10.0, oracle_step=1 / 50):
    """Ratio of SPGA's surrogate to the brute-force grid optimum for N=2."""
    sc = generate_scenario(seed, ScenarioParams(num_antennas=2))
    geo = ArrayGeometry(ula_positions(2, lam / 2), 0.0, region * lam, lam / 2)
    cfg = solver.SolverConfig(power_budget=1.0, initial_layout="ula")
    F0, x0, aux = solver.initialize(sc, geo, cfg)
    qf = fp_core.assemble_quadratic_form(sc, x0, aux, cfg.weights)
    F, _ = fp_core.beamformer_update(qf, cfg.power_budget)
    x = position_opt.spga(x0, F, aux, sc, cfg.weights, geo)
    achieved = metrics.surrogate(F, x, aux, sc, cfg.weights)
    _, best = oracles.exhaustive_positions(sc, F, aux, cfg.weights, geo, oracle_step * lam)
    return achieved / best


@_timed
def check_spga_oracle(seeds=20, need=18, ratio=0.99) -> CheckResult:
    ratios = [spga_vs_exhaustive(s) for s in range(seeds)]
    hits = sum(r >= ratio for r in ratios)
    return CheckResult(
        "SPGA vs exhaustive grid", hits >= need,
        f"{hits}/{seeds} seeds reach {ratio:.0%} (min ratio {min(ratios):.4f})",
    )


ALL_CHECKS = (
    check_tightness,
    check_bisection,
    check_gradient,
    check_projection,
    check_monotone,
    check_aux_oracle,
    check_spga_oracle,
)


def run_all(quick=False):
    """Run every check; ``quick`` trims instance counts for a fast smoke run."""
    if not quick:
        return [check() for check in ALL_CHECKS]
    return [
        check_tightness(20),
        check_bisection(20),
        check_gradient(20),
        check_projection(),
        check_monotone(3),
        check_aux_oracle(5),
        check_spga_oracle(5, need=4),
    ]
