"""Antenna-position sub-problem: surrogate in x, SPGA and the DGA baseline.

With the beamformer and auxiliaries fixed, every x-dependent term of the
surrogate is linear or quadratic in ``r_b = v_b(x)^H F`` where ``v_b`` is
the (gain-weighted) steering sum of a user, the target or a clutter. The
hot loops over that representation live in :mod:`flexbeam.kernels`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .errors import InfeasibleGridError, InfeasibleRegionError
from .fp_core import AuxiliaryState
from .metrics import Weights
from .model import ArrayGeometry, Scenario, positions_feasible


@dataclass(frozen=True)
class PositionOptConfig:
    """Settings for SPGA/DGA. ``None`` lengths default to fractions of the wavelength.

    ``grid_step`` defaults to wavelength/20, ``initial_step`` to wavelength/10
    and ``ascent_tol`` to wavelength * 1e-4.
    """

    grid_step: Optional[float] = None
    ascent_max_iters: int = 100
    ascent_tol: Optional[float] = None
    armijo_shrink: float = 0.5
    armijo_slope: float = 1e-4
    initial_step: Optional[float] = None
    max_backtracks: int = 40

    def __post_init__(self):
        if not (0 < self.armijo_shrink < 1 and 0 < self.armijo_slope < 1):
            raise ValueError("Armijo parameters must lie in (0, 1)")
        if self.ascent_max_iters < 1 or self.max_backtracks < 1:
            raise ValueError("iteration budgets must be positive")
        for name in ("grid_step", "ascent_tol", "initial_step"):
            value = getattr(self, name)
            if value is not None and value <= 0:
                raise ValueError(f"{name} must be positive")

    def resolved(self, wavelength: float) -> "PositionOptConfig":
        return PositionOptConfig(
            grid_step=self.grid_step if self.grid_step is not None else wavelength / 20,
            ascent_max_iters=self.ascent_max_iters,
            ascent_tol=self.ascent_tol if self.ascent_tol is not None else wavelength * 1e-4,
            armijo_shrink=self.armijo_shrink,
            armijo_slope=self.armijo_slope,
            initial_step=self.initial_step if self.initial_step is not None else wavelength / 10,
            max_backtracks=self.max_backtracks,
        )


@dataclass(frozen=True)
class ProjectionResult:
    positions: np.ndarray
    permutation: np.ndarray


class PositionSurrogate:
    """The surrogate as a function of antenna positions only.

    Built once per (F, aux); ``value`` includes the x-independent constant so
    it agrees with :func:`flexbeam.metrics.surrogate`.
    """

    def __init__(self, F, aux: AuxiliaryState, scenario: Scenario, weights: Weights):
        K = scenario.num_users
        wc, ws = weights.comm, weights.sense
        k0 = 2 * np.pi / scenario.wavelength
        betas, gains, offsets = [], [], [0]
        for user in scenario.users:
            betas.append(k0 * np.cos(user.angles))
            gains.append(np.sqrt(scenario.num_antennas / user.num_paths) * user.gains)
            offsets.append(offsets[-1] + user.num_paths)
        scatter_angles = np.concatenate([[scenario.target_angle], scenario.clutter_angles])
        scatter_gains = np.concatenate([[scenario.target_gain], scenario.clutter_gains])
        for angle, gain in zip(scatter_angles, scatter_gains):
            betas.append([k0 * np.cos(angle)])
            gains.append([np.conj(gain)])
            offsets.append(offsets[-1] + 1)
        self.betas = np.ascontiguousarray(np.concatenate(betas), dtype=float)
        self.gains = np.ascontiguousarray(np.concatenate(gains), dtype=complex)
        self.offsets = np.asarray(offsets, dtype=np.intp)

        mu = aux.mu
        xi_s_energy = float(np.sum(np.abs(aux.xi_s) ** 2))
        B = K + 1 + scenario.num_clutters
        W = np.zeros((B, K + 1), dtype=complex)
        q = np.empty(B)
        W[np.arange(K), np.arange(K)] = wc * np.sqrt(1 + mu[:K]) * aux.xi_c
        q[:K] = wc * np.abs(aux.xi_c) ** 2
        W[K] = ws * np.sqrt(1 + mu[K]) * aux.xi_s
        q[K:] = ws * xi_s_energy
        self.W = W
        self.q = q
        self.F = np.ascontiguousarray(F, dtype=complex)
        self.constant = float(
            wc * np.sum(np.log1p(mu[:K]) - mu[:K] - np.abs(aux.xi_c) ** 2 * scenario.user_noise)
            + ws * (np.log1p(mu[K]) - mu[K] - xi_s_energy * scenario.sensing_noise)
        )

    def _args(self):
        return self.F, self.betas, self.gains, self.offsets, self.W, self.q

    def value(self, x) -> float:
        x = np.ascontiguousarray(x, dtype=float)
        return kernels.surrogate_value(x, *self._args()) + self.constant

    def grad(self, x) -> np.ndarray:
        x = np.ascontiguousarray(x, dtype=float)
        return np.asarray(kernels.surrogate_grad(x, *self._args()))

    def scan(self, x, n: int, candidates) -> np.ndarray:
        """Surrogate values with antenna ``n`` moved to each candidate coordinate."""
        x = np.ascontiguousarray(x, dtype=float)
        candidates = np.ascontiguousarray(candidates, dtype=float)
        return np.asarray(kernels.scan_antenna(x, n, candidates, *self._args())) + self.constant

    def armijo_coordinate(self, x, n: int, g: float, f0: float, cfg: "PositionOptConfig"):
        """Backtracking step on coordinate ``n``; returns ``(kappa, value)``, kappa 0 on failure."""
        x = np.ascontiguousarray(x, dtype=float)
        kappa, value = kernels.armijo_coordinate(
            x, n, g, f0 - self.constant, cfg.initial_step, cfg.armijo_shrink,
            cfg.armijo_slope, cfg.max_backtracks, *self._args(),
        )
        return kappa, value + self.constant

    def coordinate_ascent(self, x, cfg: "PositionOptConfig") -> np.ndarray:
        x = np.ascontiguousarray(x, dtype=float)
        return np.asarray(
            kernels.coordinate_ascent(
                x, cfg.ascent_max_iters, cfg.ascent_tol, cfg.initial_step, cfg.armijo_shrink,
                cfg.armijo_slope, cfg.max_backtracks, *self._args(),
            )
        )


def surrogate_gradient(positions, F, aux, scenario, weights) -> np.ndarray:
    """Analytic gradient of the surrogate with respect to every antenna coordinate."""
    return PositionSurrogate(F, aux, scenario, weights).grad(positions)


def search_grid(x_min: float, x_max: float, step: float) -> np.ndarray:
    count = int(np.floor((x_max - x_min) / step + 1e-9)) + 1
    grid = x_min + step * np.arange(count)
    return np.minimum(grid, x_max)


def _grid_init(surr, positions_in, geometry: ArrayGeometry, grid_step: float, committed_only=True) -> np.ndarray:
    x = np.array(positions_in, dtype=float)
    grid = search_grid(geometry.x_min, geometry.x_max, grid_step)
    for n in range(len(x)):
        # Keep clear of every other antenna (placed or not), so each placement
        # can only raise the surrogate and the result stays feasible.
        allowed = np.ones(len(grid), dtype=bool)
        for m in (range(n) if committed_only else range(len(x))):
            if m != n:
                allowed &= np.abs(grid - x[m]) >= geometry.d0 - 1e-12
        candidates = grid[allowed]
        if candidates.size == 0:
            raise InfeasibleGridError(f"no grid point left for antenna {n}")
        values = surr.scan(x, n, candidates)
        x[n] = candidates[int(np.argmax(values))]
    return x


def grid_init(positions_in, F, aux, scenario, weights, geometry: ArrayGeometry, cfg=PositionOptConfig(), *, surrogate=None):
    """Place antennas one at a time at the best grid point clear of those already placed."""
    cfg = cfg.resolved(scenario.wavelength if scenario is not None else 1.0)
    if cfg.grid_step > (geometry.x_max - geometry.x_min) / 2:
        raise ValueError("grid step must not exceed half the region width")
    surr = surrogate or PositionSurrogate(F, aux, scenario, weights)
    return _grid_init(surr, positions_in, geometry, cfg.grid_step)


def _armijo(surr, x, f0, direction, slope_sq, cfg):
    """Backtrack along ``direction``; returns (step, new_x, new_value) or None."""
    kappa = cfg.initial_step
    for _ in range(cfg.max_backtracks):
        trial = x + kappa * direction
        f1 = surr.value(trial)
        if f1 >= f0 + cfg.armijo_slope * kappa * slope_sq:
            return kappa, trial, f1
        kappa *= cfg.armijo_shrink
    return None


def _coordinate_ascent(surr, positions_in, cfg: PositionOptConfig) -> np.ndarray:
    if isinstance(surr, PositionSurrogate):
        return surr.coordinate_ascent(positions_in, cfg)
    # Generic path for any object exposing value() and grad().
    x = np.array(positions_in, dtype=float)
    f = surr.value(x)
    for _ in range(cfg.ascent_max_iters):
        largest_move = 0.0
        for n in range(len(x)):
            g = surr.grad(x)[n]
            if g == 0.0:
                continue
            e = np.zeros_like(x)
            e[n] = g
            found = _armijo(surr, x, f, e, g * g, cfg)
            if found is None:
                continue
            kappa, x, f = found
            largest_move = max(largest_move, abs(kappa * g))
        if largest_move < cfg.ascent_tol:
            break
    return x


def coordinate_ascent(positions_in, F, aux, scenario, weights, cfg=PositionOptConfig(), *, surrogate=None) -> np.ndarray:
    """Gauss-Seidel gradient ascent over single coordinates with Armijo steps.

    The result may violate the region and spacing constraints.
    """
    cfg = cfg.resolved(scenario.wavelength if scenario is not None else 1.0)
    surr = surrogate or PositionSurrogate(F, aux, scenario, weights)
    return _coordinate_ascent(surr, positions_in, cfg)


def project_positions(positions_in, geometry: ArrayGeometry) -> ProjectionResult:
    """Sort, clamp sequentially into the feasible chain, and restore antenna order."""
    x = np.asarray(positions_in, dtype=float)
    N = len(x)
    if N * geometry.d0 > (geometry.x_max - geometry.x_min) * (1 + 1e-12):
        raise InfeasibleRegionError("region too small for the minimum spacing")
    perm = np.argsort(x, kind="stable")
    xs = x[perm].copy()
    xs[0] = min(max(xs[0], geometry.x_min), geometry.x_max - (N - 1) * geometry.d0)
    for m in range(1, N):
        upper = geometry.x_max - (N - 1 - m) * geometry.d0
        xs[m] = min(max(xs[m], xs[m - 1] + geometry.d0), upper)
    out = np.empty(N)
    out[perm] = xs
    return ProjectionResult(positions=out, permutation=perm)


def _spga(surr, positions_in, geometry: ArrayGeometry, cfg: PositionOptConfig) -> np.ndarray:
    x_in = np.asarray(positions_in, dtype=float)
    try:
        start = _grid_init(surr, x_in, geometry, cfg.grid_step)
    except InfeasibleGridError:
        start = x_in
    ascended = _coordinate_ascent(surr, start, cfg)
    projected = project_positions(ascended, geometry).positions
    # Projection can undo the ascent; keep the best feasible point seen.
    best, best_value = projected, surr.value(projected)
    for candidate in (start, x_in):
        if positions_feasible(candidate, geometry.x_min, geometry.x_max, geometry.d0):
            value = surr.value(candidate)
            if value > best_value:
                best, best_value = candidate, value
    return np.array(best, dtype=float)


def spga(positions_in, F, aux, scenario, weights, geometry: ArrayGeometry, cfg=PositionOptConfig(), *, surrogate=None) -> np.ndarray:
    """Search-based projected gradient ascent: grid search, coordinate ascent, projection.

    Falls back to ``positions_in`` when the projected result scores lower,
    so the surrogate never decreases from a feasible input.
    """
    cfg = cfg.resolved(scenario.wavelength if scenario is not None else 1.0)
    surr = surrogate or PositionSurrogate(F, aux, scenario, weights)
    return _spga(surr, positions_in, geometry, cfg)


def _max_feasible_fraction(x, step, geometry: ArrayGeometry) -> float:
    tau = 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        up = np.where(step > 0, (geometry.x_max - x) / step, np.inf)
        down = np.where(step < 0, (geometry.x_min - x) / step, np.inf)
        tau = min(tau, float(np.min(up)), float(np.min(down)))
        order = np.argsort(x, kind="stable")
        gap = np.maximum(np.diff(x[order]) - geometry.d0, 0.0)
        closing = -np.diff(step[order])
        limits = np.where(closing > 0, gap / closing, np.inf)
    if limits.size:
        tau = min(tau, float(np.min(limits)))
    return max(tau, 0.0)


DGA_MODE = 'project'


def _dga(surr, positions_in, geometry: ArrayGeometry, cfg: PositionOptConfig) -> np.ndarray:
    x = np.array(positions_in, dtype=float)
    f = surr.value(x)
    for _ in range(cfg.ascent_max_iters):
        g = surr.grad(x)
        slope_sq = float(g @ g)
        if slope_sq == 0.0:
            break
        found = _armijo(surr, x, f, g, slope_sq, cfg)
        if found is None:
            break
        kappa, trial, f_trial = found
        step = kappa * g
        tau = _max_feasible_fraction(x, step, geometry)
        if tau >= 1.0 and positions_feasible(trial, geometry.x_min, geometry.x_max, geometry.d0):
            x, f = trial, f_trial
            if np.max(np.abs(step)) < cfg.ascent_tol:
                break
            continue
        # Step leaves the feasible set: stop at the boundary.
        if DGA_MODE == "project":
            boundary = project_positions(trial, geometry).positions
        else:
            boundary = x + tau * step
        if positions_feasible(boundary, geometry.x_min, geometry.x_max, geometry.d0):
            if surr.value(boundary) >= f:
                x = boundary
        break
    return x


def dga(positions_in, F, aux, scenario, weights, geometry: ArrayGeometry, cfg=PositionOptConfig(), *, surrogate=None) -> np.ndarray:
    """Direct full-vector gradient ascent that stops at the first constraint hit."""
    cfg = cfg.resolved(scenario.wavelength if scenario is not None else 1.0)
    surr = surrogate or PositionSurrogate(F, aux, scenario, weights)
    return _dga(surr, positions_in, geometry, cfg)
