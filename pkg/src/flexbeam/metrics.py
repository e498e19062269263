"""Closed-form communication and sensing metrics.

The beamformer is a plain complex ndarray ``F`` of shape ``(N, K+1)``: column
``k < K`` serves user ``k`` and the last column is the dedicated sensing
stream. The sensing column interferes with every user.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Scenario, channel_matrix, clutter_steering, target_steering

LN2 = np.log(2.0)


@dataclass(frozen=True)
class Weights:
    """Communication/sensing priority. Only the communication share is stored."""

    comm: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.comm <= 1.0:
            raise ValueError("communication weight must lie in [0, 1]")

    @property
    def sense(self) -> float:
        return 1.0 - self.comm


@dataclass(frozen=True)
class MetricsReport:
    sinr: np.ndarray
    rates: np.ndarray
    scnr: float
    sensing_mi: float
    objective: float

    @property
    def sum_rate(self) -> float:
        return float(np.sum(self.rates))


def transmit_power(F) -> float:
    return float(np.real(np.vdot(F, F)))


def _user_gains(scenario: Scenario, positions, F) -> np.ndarray:
    """K x (K+1) matrix with entry (k, j) = h_k^H f_j."""
    H = channel_matrix(scenario, positions)
    return H.conj().T @ F


def _sensing_rows(scenario: Scenario, positions, F):
    """Target row ``alpha_s a_s^H F`` and the C x (K+1) clutter rows."""
    a_s = target_steering(scenario, positions)
    A_c = clutter_steering(scenario, positions)
    target = scenario.target_gain * (a_s.conj() @ F)
    clutter = scenario.clutter_gains[:, None] * (A_c.conj().T @ F)
    return target, clutter


def sinr(k: int, F, scenario: Scenario, positions) -> float:
    if not 0 <= k < scenario.num_users:
        raise IndexError(f"user index {k} out of range")
    G = _user_gains(scenario, positions, F)
    power = np.abs(G[k]) ** 2
    signal = power[k]
    interference = power.sum() - signal
    return float(signal / (interference + scenario.user_noise[k]))


def all_sinr(F, scenario: Scenario, positions) -> np.ndarray:
    P = np.abs(_user_gains(scenario, positions, F)) ** 2
    signal = np.diag(P[:, : scenario.num_users]).copy()
    return signal / (P.sum(axis=1) - signal + scenario.user_noise)


def scnr(F, scenario: Scenario, positions) -> float:
    target, clutter = _sensing_rows(scenario, positions, F)
    num = np.sum(np.abs(target) ** 2)
    return float(num / (np.sum(np.abs(clutter) ** 2) + scenario.sensing_noise))


def objective(F, positions, scenario: Scenario, weights: Weights) -> float:
    """Weighted sum of user rates and sensing mutual information, in bits."""
    return report(F, positions, scenario, weights).objective


def report(F, positions, scenario: Scenario, weights: Weights) -> MetricsReport:
    gammas = all_sinr(F, scenario, positions)
    rates = np.log2(1 + gammas)
    s = scnr(F, scenario, positions)
    mi = float(np.log2(1 + s))
    obj = weights.comm * float(rates.sum()) + weights.sense * mi
    return MetricsReport(sinr=gammas, rates=rates, scnr=s, sensing_mi=mi, objective=obj)


def log_objective(F, positions, scenario: Scenario, weights: Weights) -> float:
    """Same as :func:`objective` but in nats; the value the tight surrogate equals."""
    gammas = all_sinr(F, scenario, positions)
    s = scnr(F, scenario, positions)
    return weights.comm * float(np.sum(np.log1p(gammas))) + weights.sense * float(np.log1p(s))


def surrogate(F, positions, aux, scenario: Scenario, weights: Weights) -> float:
    """Fractional-programming surrogate of the objective, in nats.

    ``aux`` carries ``mu`` (K+1 nonnegative reals), ``xi_c`` (K complex) and
    ``xi_s`` (K+1 complex).
    """
    mu = np.asarray(aux.mu, dtype=float)
    if np.any(mu < 0):
        raise ValueError("mu entries must be nonnegative")
    xi_c = np.asarray(aux.xi_c, dtype=complex)
    xi_s = np.asarray(aux.xi_s, dtype=complex)
    K = scenario.num_users
    wc, ws = weights.comm, weights.sense

    G = _user_gains(scenario, positions, F)
    total = np.sum(np.abs(G) ** 2, axis=1) + scenario.user_noise
    useful = xi_c * np.diag(G[:, :K])
    comm = np.sum(np.log1p(mu[:K]) - mu[:K])
    comm += np.sum(2 * np.sqrt(1 + mu[:K]) * useful.real - np.abs(xi_c) ** 2 * total)

    target, clutter = _sensing_rows(scenario, positions, F)
    echo = np.sum(np.abs(clutter) ** 2) + np.sum(np.abs(target) ** 2) + scenario.sensing_noise
    sense = np.log1p(mu[K]) - mu[K]
    sense += 2 * np.sqrt(1 + mu[K]) * np.real(target @ xi_s) - np.sum(np.abs(xi_s) ** 2) * echo

    return float(wc * comm + ws * sense)
