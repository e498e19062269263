"""Outer alternating optimization over (F, x, mu, xi) and its baselines."""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import metrics
from .errors import FlexbeamError, InfeasibleRegionError
from .fp_core import (
    AuxiliaryState,
    BisectionConfig,
    assemble_quadratic_form,
    beamformer_update,
    initial_aux,
    update_mu,
    update_xi,
)
from .metrics import MetricsReport, Weights
from .model import ArrayGeometry, Scenario, channel_matrix, positions_feasible, target_steering, ula_positions
from .position_opt import PositionOptConfig, PositionSurrogate, _dga, _spga


class Algorithm(str, enum.Enum):
    SPGA_FBF_MA = "SPGA-FBF-MA"
    DGA_FBF_MA = "DGA-FBF-MA"
    BF_FPA = "BF-FPA"


@dataclass(frozen=True)
class SolverConfig:
    power_budget: float = 1.0
    weights: Weights = Weights(0.5)
    outer_tol: float = 1e-4
    outer_max_iters: int = 100
    position_cfg: PositionOptConfig = PositionOptConfig()
    bisection_cfg: BisectionConfig = BisectionConfig()
    algorithm: Algorithm = Algorithm.SPGA_FBF_MA
    # "ula" or "spread"; None picks spread for SPGA and ULA for the baselines.
    initial_layout: Optional[str] = None

    def __post_init__(self):
        if self.initial_layout not in (None, "ula", "spread"):
            raise ValueError("initial_layout must be 'ula', 'spread' or None")
        if self.power_budget <= 0:
            raise ValueError("power budget must be positive")
        if self.outer_tol <= 0:
            raise ValueError("outer_tol must be positive")
        if self.outer_max_iters < 1:
            raise ValueError("outer_max_iters must be positive")
        object.__setattr__(self, "algorithm", Algorithm(self.algorithm))

    @property
    def layout(self) -> str:
        if self.initial_layout is not None:
            return self.initial_layout
        return "spread" if self.algorithm is Algorithm.SPGA_FBF_MA else "ula"


@dataclass
class SolveResult:
    F: np.ndarray
    positions: np.ndarray
    metrics: MetricsReport
    surrogate_trajectory: list = field(default_factory=list)
    objective_trajectory: list = field(default_factory=list)
    iterations: int = 0
    wall_time: float = 0.0
    aux: AuxiliaryState = None


class SolverError(FlexbeamError):
    def __init__(self, iteration, cause):
        super().__init__(f"outer iteration {iteration}: {cause}")
        self.iteration = iteration
        self.__cause__ = cause


def _unit(v):
    norm = np.linalg.norm(v)
    if norm == 0:
        return np.full(len(v), 1 / np.sqrt(len(v)), dtype=complex)
    return v / norm


def initial_positions(scenario: Scenario, geometry: ArrayGeometry, layout: str = "ula") -> np.ndarray:
    """Half-wavelength ULA anchored at x_min, or N points spread evenly over the region."""
    N = scenario.num_antennas
    if layout == "spread" and N > 1:
        x0 = np.linspace(geometry.x_min, geometry.x_max, N)
    else:
        x0 = ula_positions(N, scenario.wavelength / 2, geometry.x_min)
    if not positions_feasible(x0, geometry.x_min, geometry.x_max, geometry.d0):
        raise InfeasibleRegionError(f"{layout} layout does not fit the region and spacing")
    return x0


def initialize(scenario: Scenario, geometry: ArrayGeometry, cfg: SolverConfig):
    """Initial layout, channel-matched columns at equal power, and a tight aux state."""
    x0 = initial_positions(scenario, geometry, cfg.layout)
    H = channel_matrix(scenario, x0)
    columns = [_unit(H[:, k]) for k in range(scenario.num_users)]
    columns.append(_unit(target_steering(scenario, x0)))
    F0 = np.sqrt(cfg.power_budget / len(columns)) * np.stack(columns, axis=1)
    aux0 = initial_aux(F0, x0, scenario, cfg.weights)
    return F0, x0, aux0


def _ao_step(scenario, geometry, cfg, F, x, aux):
    weights = cfg.weights
    qf = assemble_quadratic_form(scenario, x, aux, weights)
    F, _ = beamformer_update(qf, cfg.power_budget, cfg.bisection_cfg)
    if cfg.algorithm is not Algorithm.BF_FPA:
        surr = PositionSurrogate(F, aux, scenario, weights)
        pos_cfg = cfg.position_cfg.resolved(scenario.wavelength)
        if cfg.algorithm is Algorithm.SPGA_FBF_MA:
            x_new = _spga(surr, x, geometry, pos_cfg)
        else:
            x_new = _dga(surr, x, geometry, pos_cfg)
        if surr.value(x_new) >= surr.value(x):
            x = x_new
    mu = update_mu(F, x, aux, scenario, weights)
    xi_c, xi_s = update_xi(F, x, mu, scenario, weights)
    return F, x, AuxiliaryState(mu, xi_c, xi_s)


def solve(scenario: Scenario, geometry: ArrayGeometry, cfg: SolverConfig = SolverConfig()) -> SolveResult:
    start = time.perf_counter()
    weights = cfg.weights
    F, x, aux = initialize(scenario, geometry, cfg)
    value = metrics.surrogate(F, x, aux, scenario, weights)
    surr_traj = [value]
    obj_traj = [metrics.objective(F, x, scenario, weights)]
    iterations = 0
    for t in range(cfg.outer_max_iters):
        try:
            F, x, aux = _ao_step(scenario, geometry, cfg, F, x, aux)
        except FlexbeamError as exc:
            raise SolverError(t, exc) from exc
        iterations = t + 1
        previous, value = value, metrics.surrogate(F, x, aux, scenario, weights)
        surr_traj.append(value)
        obj_traj.append(metrics.objective(F, x, scenario, weights))
        if abs(value - previous) <= cfg.outer_tol * max(abs(previous), 1e-12):
            break
    return SolveResult(
        F=F,
        positions=x,
        metrics=metrics.report(F, x, scenario, weights),
        surrogate_trajectory=surr_traj,
        objective_trajectory=obj_traj,
        iterations=iterations,
        wall_time=time.perf_counter() - start,
        aux=aux,
    )
