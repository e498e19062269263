"""Closed-form block updates of the fractional-programming alternating ascent.

Given positions, the surrogate is a concave quadratic in every beamformer
column sharing one Hermitian matrix ``lam``; it is maximized under the power
budget by a bisection on the dual variable. The auxiliaries ``mu`` and ``xi``
are updated by their exact maximizers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import metrics
from .errors import BisectionError, ConvergenceError
from .metrics import Weights
from .model import Scenario, channel_matrix, clutter_steering, target_steering


@dataclass(frozen=True)
class AuxiliaryState:
    mu: np.ndarray
    xi_c: np.ndarray
    xi_s: np.ndarray

    def __post_init__(self):
        mu = np.array(self.mu, dtype=float)
        if np.any(mu < 0) or not np.all(np.isfinite(mu)):
            raise ValueError("mu must be finite and nonnegative")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "xi_c", np.array(self.xi_c, dtype=complex))
        object.__setattr__(self, "xi_s", np.array(self.xi_s, dtype=complex))

    @classmethod
    def zeros(cls, num_users: int) -> "AuxiliaryState":
        return cls(np.zeros(num_users + 1), np.zeros(num_users, complex), np.zeros(num_users + 1, complex))


@dataclass(frozen=True)
class QuadraticForm:
    """``sum_k 2 Re{phi_k^H f_k} - f_k^H lam f_k``; ``phi`` holds phi_k as columns."""

    lam: np.ndarray
    phi: np.ndarray


@dataclass(frozen=True)
class BisectionConfig:
    lambda_min: float = 0.0
    lambda_max: Optional[float] = None
    tolerance: Optional[float] = None
    max_iters: int = 200

    def __post_init__(self):
        if self.lambda_min < 0:
            raise ValueError("lambda_min must be nonnegative")
        if self.lambda_max is not None and not self.lambda_max > self.lambda_min:
            raise ValueError("lambda_max must exceed lambda_min")
        if self.tolerance is not None and self.tolerance <= 0:
            raise ValueError("tolerance must be positive")


def assemble_quadratic_form(scenario: Scenario, positions, aux: AuxiliaryState, weights: Weights) -> QuadraticForm:
    K = scenario.num_users
    wc, ws = weights.comm, weights.sense
    H = channel_matrix(scenario, positions)
    a_s = target_steering(scenario, positions)
    A_c = clutter_steering(scenario, positions)
    xi_s_energy = float(np.sum(np.abs(aux.xi_s) ** 2))

    Hx = H * aux.xi_c
    echo = (A_c * np.abs(scenario.clutter_gains) ** 2) @ A_c.conj().T
    echo += abs(scenario.target_gain) ** 2 * np.outer(a_s, a_s.conj())
    lam = wc * (Hx @ Hx.conj().T) + ws * xi_s_energy * echo
    lam = 0.5 * (lam + lam.conj().T)

    sense_coef = ws * np.sqrt(1 + aux.mu[K]) * np.conj(scenario.target_gain) * np.conj(aux.xi_s)
    phi = np.outer(a_s, sense_coef)
    phi[:, :K] += H * (wc * np.sqrt(1 + aux.mu[:K]) * np.conj(aux.xi_c))
    return QuadraticForm(lam=lam, phi=phi)


def _power_curve(eigvals, proj_energy):
    def power(lmbda):
        return float(np.sum(proj_energy / (eigvals + lmbda) ** 2))

    return power


def beamformer_update(qf: QuadraticForm, power_budget: float, cfg: BisectionConfig = BisectionConfig()):
    """Maximize the quadratic form subject to ``trace(F^H F) <= power_budget``.

    Returns ``(F, lambda_star)``.
    """
    if power_budget <= 0:
        raise ValueError("power budget must be positive")
    phi = np.asarray(qf.phi, dtype=complex)
    eps = cfg.tolerance if cfg.tolerance is not None else 1e-8 * power_budget

    d, U = np.linalg.eigh(qf.lam)
    d = np.clip(d, 0.0, None)
    coeffs = U.conj().T @ phi
    proj_energy = np.sum(np.abs(coeffs) ** 2, axis=1)
    if not np.any(proj_energy > 0):
        return np.zeros_like(phi), 0.0

    def solve(lmbda):
        return U @ (coeffs / (d + lmbda)[:, None])

    power = _power_curve(d, proj_energy)
    scale = max(d.max(), 1.0)
    singular = d <= 1e-12 * scale
    if not singular.any():
        if power(0.0) <= power_budget:
            return solve(0.0), 0.0
    elif np.all(proj_energy[singular] <= 1e-24 * proj_energy.sum()):
        # phi lies in the range of lam: the pseudo-inverse solution is the
        # unconstrained maximizer.
        dd = np.where(singular, np.inf, d)
        if float(np.sum(proj_energy[~singular] / dd[~singular] ** 2)) <= power_budget:
            return U @ (coeffs / dd[:, None]), 0.0
        d = np.where(singular, 0.0, d)

    lo = cfg.lambda_min
    hi = cfg.lambda_max
    if hi is None:
        hi = float(np.linalg.norm(phi)) / np.sqrt(power_budget)
    for _ in range(200):
        if power(hi) - power_budget <= 0:
            break
        hi *= 2.0
    else:
        raise BisectionError("could not find lambda_max with nonpositive power excess")
    if lo > 0 and power(lo) - power_budget < -eps:
        raise BisectionError("power excess at lambda_min is already negative")

    lmbda = hi
    for _ in range(cfg.max_iters):
        lmbda = 0.5 * (lo + hi)
        excess = power(lmbda) - power_budget
        if abs(excess) <= eps:
            return solve(lmbda), lmbda
        if excess > 0:
            lo = lmbda
        else:
            hi = lmbda
        if hi - lo <= 4 * np.finfo(float).eps * hi:
            # Interval exhausted at double precision; the upper end is feasible.
            return solve(hi), hi
    raise ConvergenceError(
        f"bisection did not reach tolerance {eps:g} in {cfg.max_iters} iterations",
        last_iterate=(solve(lmbda), lmbda),
    )


def _sensing_terms(F, positions, scenario: Scenario):
    a_s = target_steering(scenario, positions)
    A_c = clutter_steering(scenario, positions)
    target = scenario.target_gain * (a_s.conj() @ F)
    clutter = scenario.clutter_gains[:, None] * (A_c.conj().T @ F)
    echo = np.sum(np.abs(clutter) ** 2) + np.sum(np.abs(target) ** 2) + scenario.sensing_noise
    return target, echo


def update_mu(F, positions, aux: AuxiliaryState, scenario: Scenario, weights: Weights = None) -> np.ndarray:
    K = scenario.num_users
    H = channel_matrix(scenario, positions)
    useful = np.einsum("nk,nk->k", H.conj(), F[:, :K])
    target, _ = _sensing_terms(F, positions, scenario)
    r = np.empty(K + 1)
    r[:K] = np.real(aux.xi_c * useful)
    r[K] = np.real(target @ aux.xi_s)
    mu = 0.5 * (r**2 + r * np.sqrt(r**2 + 4))
    return np.maximum(mu, 0.0)


def update_xi(F, positions, mu, scenario: Scenario, weights: Weights = None):
    K = scenario.num_users
    mu = np.asarray(mu, dtype=float)
    if np.any(mu < 0):
        raise ValueError("mu must be nonnegative")
    H = channel_matrix(scenario, positions)
    G = H.conj().T @ F
    total = np.sum(np.abs(G) ** 2, axis=1) + scenario.user_noise
    xi_c = np.sqrt(1 + mu[:K]) * np.conj(np.diag(G[:, :K])) / total
    target, echo = _sensing_terms(F, positions, scenario)
    xi_s = np.sqrt(1 + mu[K]) * np.conj(target) / echo
    return xi_c, xi_s


def initial_aux(F, positions, scenario: Scenario, weights: Weights = None) -> AuxiliaryState:
    """Aux state that makes the surrogate tight: mu from the current ratios, then xi."""
    mu = np.concatenate([metrics.all_sinr(F, scenario, positions), [metrics.scnr(F, scenario, positions)]])
    xi_c, xi_s = update_xi(F, positions, mu, scenario, weights)
    return AuxiliaryState(mu, xi_c, xi_s)


def aux_fixed_point(
    F, positions, scenario: Scenario, weights: Weights, aux: AuxiliaryState = None, *, max_iters=50, tol=1e-12
) -> AuxiliaryState:
    """Alternate mu and xi updates until the mu vector stops moving."""
    if aux is None:
        aux = initial_aux(F, positions, scenario, weights)
    for _ in range(max_iters):
        mu = update_mu(F, positions, aux, scenario, weights)
        xi_c, xi_s = update_xi(F, positions, mu, scenario, weights)
        change = np.max(np.abs(mu - aux.mu) / (1 + np.abs(aux.mu)))
        aux = AuxiliaryState(mu, xi_c, xi_s)
        if change <= tol:
            break
    return aux
