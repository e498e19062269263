"""Slow reference implementations used to cross-check the fast path.

Nothing here calls into ``metrics``, ``fp_core`` or ``position_opt``: the
surrogate is re-derived from channel primitives in ``model`` so a mistake in
the optimized code cannot cancel against the same mistake here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import UnsupportedSizeError
from .model import ArrayGeometry, Scenario, steering_vector, user_channel

GOLDEN = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class FDConfig:
    step: float = 1e-6

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("finite-difference step must be positive")


def fd_gradient(f, positions, cfg: FDConfig = FDConfig()) -> np.ndarray:
    """Central differences of ``f`` along each coordinate."""
    x = np.asarray(positions, dtype=float)
    h = cfg.step
    out = np.empty(len(x))
    for n in range(len(x)):
        e = np.zeros(len(x))
        e[n] = h
        out[n] = (f(x + e) - f(x - e)) / (2 * h)
    return out


@dataclass(frozen=True)
class _Terms:
    """Per-layout scalars the surrogate depends on, batched over leading dims.

    ``useful[..., k] = h_k^H f_k``, ``received[..., k] = sum_j |h_k^H f_j|^2 + noise``,
    ``target_row = alpha_s a_s^H F`` and ``sensing_power`` is the
    clutter-plus-target-plus-noise power seen by the sensing receiver.
    """

    useful: np.ndarray
    received: np.ndarray
    target_row: np.ndarray
    sensing_power: np.ndarray


def _terms(scenario: Scenario, F, X) -> _Terms:
    F = np.asarray(F, dtype=complex)
    X = np.asarray(X, dtype=float)
    K = scenario.num_users
    useful, received = [], []
    for k in range(K):
        h = user_channel(scenario, k, X)
        proj = np.einsum("...n,nj->...j", h.conj(), F)
        useful.append(proj[..., k])
        received.append(np.sum(np.abs(proj) ** 2, axis=-1) + scenario.user_noise[k])
    a_s = steering_vector(X, scenario.target_angle, scenario.wavelength)
    target_row = scenario.target_gain * np.einsum("...n,nj->...j", a_s.conj(), F)
    power = np.sum(np.abs(target_row) ** 2, axis=-1) + scenario.sensing_noise
    for angle, gain in zip(scenario.clutter_angles, scenario.clutter_gains):
        a_c = steering_vector(X, angle, scenario.wavelength)
        row = gain * np.einsum("...n,nj->...j", a_c.conj(), F)
        power = power + np.sum(np.abs(row) ** 2, axis=-1)
    return _Terms(np.stack(useful, -1), np.stack(received, -1), target_row, power)


def _surrogate_from_terms(t: _Terms, mu, xi_c, xi_s, weights) -> np.ndarray:
    mu = np.asarray(mu, dtype=float)
    K = len(xi_c)
    comm = (
        np.log1p(mu[:K]) - mu[:K]
        + 2 * np.sqrt(1 + mu[:K]) * np.real(xi_c * t.useful)
        - np.abs(xi_c) ** 2 * t.received
    )
    sense = (
        np.log1p(mu[K]) - mu[K]
        + 2 * np.sqrt(1 + mu[K]) * np.real(t.target_row @ xi_s)
        - np.sum(np.abs(xi_s) ** 2) * t.sensing_power
    )
    return weights.comm * np.sum(comm, axis=-1) + weights.sense * sense


def _feasible_tuples(grid, n_antennas, d0):
    if n_antennas == 1:
        return grid[:, None]
    i, j = np.meshgrid(np.arange(len(grid)), np.arange(len(grid)), indexing="ij")
    i, j = i.ravel(), j.ravel()  # row-major: lexicographic order
    keep = np.abs(grid[i] - grid[j]) >= d0 - 1e-12
    return np.stack([grid[i[keep]], grid[j[keep]]], axis=1)


def exhaustive_positions(scenario: Scenario, F, aux, weights, geometry: ArrayGeometry, grid_step: float):
    """Best layout on a grid by brute force, for one or two antennas.

    Every grid tuple with spacing at least ``d0`` is scored. Ties go to the
    lexicographically smallest tuple. Returns ``(positions, value)``.
    """
    N = scenario.num_antennas
    if N > 2:
        raise UnsupportedSizeError(f"exhaustive search supports N <= 2, got {N}")
    if not grid_step > 0:
        raise ValueError("grid step must be positive")
    count = int(np.floor((geometry.x_max - geometry.x_min) / grid_step + 1e-9)) + 1
    grid = np.minimum(geometry.x_min + grid_step * np.arange(count), geometry.x_max)
    tuples = _feasible_tuples(grid, N, geometry.d0)
    if len(tuples) == 0:
        raise UnsupportedSizeError("no feasible grid tuple for this spacing")
    values = _surrogate_from_terms(_terms(scenario, F, tuples), aux.mu, aux.xi_c, aux.xi_s, weights)
    best = int(np.argmax(values))  # first maximum = lexicographically smallest
    return tuples[best].copy(), float(values[best])


def _golden_max(f, lo, hi, iters=200):
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if b - a <= 1e-13 * max(1.0, abs(a)):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    x = (a + b) / 2
    # The interior search cannot land exactly on the boundary.
    return lo if f(lo) >= f(x) else x


def _parabola_step(f, v, idx, part):
    """Exact maximizer of a concave quadratic along one real coordinate of ``v``."""
    def at(s):
        w = v.copy()
        w[idx] += s if part == 0 else 1j * s
        return f(w)

    h = max(1.0, abs(v[idx]))
    fm, f0, fp = at(-h), at(0.0), at(h)
    curvature = fm - 2 * f0 + fp
    if curvature >= 0:
        return v
    w = v.copy()
    s = h * (fm - fp) / (2 * curvature)
    w[idx] += s if part == 0 else 1j * s
    return w


def _maximize_block(f, v, tol=1e-10, max_passes=100):
    v = np.array(v, dtype=complex)
    for _ in range(max_passes):
        before = v.copy()
        for idx in range(len(v)):
            for part in (0, 1):
                v = _parabola_step(f, v, idx, part)
        if np.max(np.abs(v - before), initial=0.0) <= tol * max(1.0, np.max(np.abs(v), initial=0.0)):
            break
    return v


def numeric_aux_maximizer(F, positions, scenario: Scenario, weights, tol=1e-10, max_rounds=100):
    """Maximize the surrogate over the auxiliaries by plain numerical search.

    Each ``mu`` entry is found by golden-section search on ``[0, 1e6]`` of the
    profile in which its paired ``xi`` block has already been maximized. Each
    ``xi`` block is maximized by coordinate-wise exact parabola steps. Rounds
    repeat until the surrogate gains less than ``tol`` (relative).
    Returns an object with ``mu``, ``xi_c`` and ``xi_s`` attributes.
    """
    from .fp_core import AuxiliaryState  # container only

    t = _terms(scenario, F, positions)
    K = scenario.num_users
    mu = np.zeros(K + 1)
    xi_c = np.zeros(K, dtype=complex)
    xi_s = np.zeros(K + 1, dtype=complex)

    def value(m, c, s):
        return float(_surrogate_from_terms(t, m, c, s, weights))

    def best_xi(block, m, c, s):
        if block < K:
            def g(v):
                cc = c.copy()
                cc[block] = v[0]
                return value(m, cc, s)
            c = c.copy()
            c[block] = _maximize_block(g, c[block:block + 1])[0]
            return c, s
        return c, _maximize_block(lambda v: value(m, c, v), s)

    current = value(mu, xi_c, xi_s)
    for _ in range(max_rounds):
        for block in range(K + 1):
            def profile(m_block):
                m = mu.copy()
                m[block] = m_block
                c, s = best_xi(block, m, xi_c, xi_s)
                return value(m, c, s)

            mu[block] = _golden_max(profile, 0.0, 1e6)
            xi_c, xi_s = best_xi(block, mu, xi_c, xi_s)
        previous, current = current, value(mu, xi_c, xi_s)
        if current - previous <= tol * max(1.0, abs(current)):
            break
    return AuxiliaryState(mu, xi_c, xi_s)
