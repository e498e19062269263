"""Seeded Monte Carlo sweeps and their CSV / plot-data output."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import os
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from .errors import FlexbeamError
from .metrics import Weights
from .model import ArrayGeometry, ScenarioParams, generate_scenario, substream_seed, ula_positions
from .position_opt import PositionOptConfig
from .solver import Algorithm, SolverConfig, solve

SWEEP_VARS = ("power_dbm", "region_lambda", "comm_weight")
RECORD_FIELDS = (
    "seed", "sweep_var", "sweep_value", "algorithm", "n_antennas",
    "objective_bits", "sum_rate_bits", "sensing_mi_bits", "outer_iters", "wall_ms",
)
AGGREGATE_FIELDS = (
    "sweep_var", "sweep_value", "algorithm", "n_antennas", "count",
    "objective_mean", "objective_se", "sum_rate_mean", "sum_rate_se",
    "sensing_mi_mean", "sensing_mi_se", "outer_iters_mean",
)


class ConfigError(FlexbeamError, ValueError):
    pass


def dbm_to_watts(p_dbm: float) -> float:
    return 10.0 ** ((p_dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class ExperimentConfig:
    """Flat, JSON-serializable description of one sweep.

    Lengths in the geometry are multiples of the wavelength; the target
    angle is in degrees. The non-swept operating point is taken from
    ``power_dbm``, ``region_lambda`` and ``comm_weight``.
    """

    num_users: int = 4
    num_clutters: int = 3
    antenna_counts: tuple = (4,)
    num_paths: int = 13
    wavelength: float = 0.1
    target_angle_deg: float = 60.0
    gain_variance: float = 1.0
    user_noise: float = 1.0
    sensing_noise: float = 1.0
    x_min_lambda: float = 0.0
    region_lambda: float = 10.0
    d0_lambda: float = 0.5
    power_dbm: float = 30.0
    comm_weight: float = 0.5
    outer_tol: float = 1e-4
    outer_max_iters: int = 100
    grid_step_lambda: float = 0.05
    sweep_var: str = "power_dbm"
    sweep_values: tuple = (10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0)
    algorithms: tuple = tuple(a.value for a in Algorithm)
    num_seeds: int = 50
    master_seed: int = 0
    out: str = "runs/sweep"
    workers: int = 1
    record_timing: bool = False

    def __post_init__(self):
        for name in ("antenna_counts", "sweep_values", "algorithms"):
            value = getattr(self, name)
            if isinstance(value, (str, bytes)) or not hasattr(value, "__iter__"):
                raise ConfigError(f"{name} must be a list")
            object.__setattr__(self, name, tuple(value))
        object.__setattr__(self, "sweep_values", tuple(float(v) for v in self.sweep_values))
        object.__setattr__(self, "antenna_counts", tuple(int(n) for n in self.antenna_counts))
        if self.sweep_var not in SWEEP_VARS:
            raise ConfigError(f"sweep_var must be one of {', '.join(SWEEP_VARS)}")
        if not self.sweep_values:
            raise ConfigError("sweep_values must be nonempty")
        if list(self.sweep_values) != sorted(self.sweep_values):
            raise ConfigError("sweep_values must be sorted ascending")
        if self.num_seeds < 1:
            raise ConfigError("num_seeds must be at least 1")
        if not self.antenna_counts or min(self.antenna_counts) < 1:
            raise ConfigError("antenna_counts must hold positive integers")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if not self.algorithms:
            raise ConfigError("algorithms must be nonempty")
        for name in self.algorithms:
            try:
                Algorithm(name)
            except ValueError:
                raise ConfigError(f"unknown algorithm {name!r}") from None
        if self.sweep_var == "comm_weight" and not all(0 <= v <= 1 for v in self.sweep_values):
            raise ConfigError("comm_weight values must lie in [0, 1]")
        try:
            self.scenario_params(self.antenna_counts[0])
            self.solver_config(self.sweep_values[0])
            for n in self.antenna_counts:
                for v in self.sweep_values:
                    self.geometry(n, v)
        except (ValueError, FlexbeamError) as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        for name in ("antenna_counts", "sweep_values", "algorithms"):
            out[name] = list(out[name])
        return out

    def replace(self, **changes) -> "ExperimentConfig":
        return self.from_dict({**self.to_dict(), **changes})

    def _operating_point(self, sweep_value: Optional[float]):
        point = {"power_dbm": self.power_dbm, "region_lambda": self.region_lambda, "comm_weight": self.comm_weight}
        if sweep_value is not None:
            point[self.sweep_var] = sweep_value
        return point

    def scenario_params(self, n_antennas: int) -> ScenarioParams:
        return ScenarioParams(
            num_users=self.num_users,
            num_clutters=self.num_clutters,
            num_antennas=n_antennas,
            num_paths=self.num_paths,
            wavelength=self.wavelength,
            target_angle=math.radians(self.target_angle_deg),
            gain_variance=self.gain_variance,
            user_noise=self.user_noise,
            sensing_noise=self.sensing_noise,
        )

    def geometry(self, n_antennas: int, sweep_value: Optional[float] = None) -> ArrayGeometry:
        lam = self.wavelength
        x_min = self.x_min_lambda * lam
        x_max = x_min + self._operating_point(sweep_value)["region_lambda"] * lam
        return ArrayGeometry(ula_positions(n_antennas, lam / 2, x_min), x_min, x_max, self.d0_lambda * lam)

    def solver_config(self, sweep_value: Optional[float] = None, algorithm=Algorithm.SPGA_FBF_MA) -> SolverConfig:
        point = self._operating_point(sweep_value)
        return SolverConfig(
            power_budget=dbm_to_watts(point["power_dbm"]),
            weights=Weights(point["comm_weight"]),
            outer_tol=self.outer_tol,
            outer_max_iters=self.outer_max_iters,
            position_cfg=PositionOptConfig(grid_step=self.grid_step_lambda * self.wavelength),
            algorithm=algorithm,
        )


def figure_defaults(sweep_var: str) -> ExperimentConfig:
    """Operating points of the three published sweeps."""
    if sweep_var == "power_dbm":
        return ExperimentConfig(
            antenna_counts=(4, 8), region_lambda=10.0, comm_weight=0.5,
            sweep_var="power_dbm", sweep_values=tuple(range(10, 41, 5)), out="runs/power",
        )
    if sweep_var == "region_lambda":
        return ExperimentConfig(
            antenna_counts=(4, 8), power_dbm=30.0, comm_weight=0.5,
            sweep_var="region_lambda", sweep_values=tuple(range(6, 22)), out="runs/region",
        )
    if sweep_var == "comm_weight":
        return ExperimentConfig(
            antenna_counts=(4,), power_dbm=30.0, region_lambda=10.0,
            sweep_var="comm_weight", sweep_values=tuple(round(0.1 * i, 1) for i in range(11)),
            out="runs/tradeoff",
        )
    raise ConfigError(f"unknown sweep variable {sweep_var!r}")


@dataclass(frozen=True)
class SweepRecord:
    seed: int
    sweep_var: str
    sweep_value: float
    algorithm: str
    n_antennas: int
    objective_bits: float
    sum_rate_bits: float
    sensing_mi_bits: float
    outer_iters: int
    wall_ms: float
    scenario_hash: str = field(default="", compare=False)


@dataclass(frozen=True)
class FailedRun:
    seed: int
    sweep_value: float
    algorithm: str
    n_antennas: int
    error: str


@dataclass(frozen=True)
class Aggregate:
    sweep_var: str
    sweep_value: float
    algorithm: str
    n_antennas: int
    count: int
    objective_mean: float
    objective_se: float
    sum_rate_mean: float
    sum_rate_se: float
    sensing_mi_mean: float
    sensing_mi_se: float
    outer_iters_mean: float


@dataclass
class SweepResult:
    config: ExperimentConfig
    records: list
    aggregates: list
    failures: list

    def table(self, metric: str = "objective"):
        """``{(algorithm, N): (values, means, standard errors)}`` over the sweep."""
        out = {}
        for agg in self.aggregates:
            key = (agg.algorithm, agg.n_antennas)
            out.setdefault(key, ([], [], []))
            out[key][0].append(agg.sweep_value)
            out[key][1].append(getattr(agg, f"{metric}_mean"))
            out[key][2].append(getattr(agg, f"{metric}_se"))
        return {k: tuple(np.array(c) for c in v) for k, v in out.items()}


def _run_task(args):
    cfg, seed_index, n_antennas = args
    scenario = generate_scenario(substream_seed(cfg.master_seed, seed_index), cfg.scenario_params(n_antennas))
    fingerprint = scenario.fingerprint()
    records, failures = [], []
    for value in cfg.sweep_values:
        geometry = cfg.geometry(n_antennas, value)
        for name in cfg.algorithms:
            solver_cfg = cfg.solver_config(value, Algorithm(name))
            start = time.perf_counter()
            try:
                result = solve(scenario, geometry, solver_cfg)
            except (FlexbeamError, ArithmeticError, np.linalg.LinAlgError) as exc:
                failures.append(FailedRun(seed_index, value, name, n_antennas, f"{type(exc).__name__}: {exc}"))
                continue
            wall = (time.perf_counter() - start) * 1e3 if cfg.record_timing else 0.0
            m = result.metrics
            records.append(SweepRecord(
                seed=seed_index, sweep_var=cfg.sweep_var, sweep_value=value, algorithm=name,
                n_antennas=n_antennas, objective_bits=m.objective, sum_rate_bits=m.sum_rate,
                sensing_mi_bits=m.sensing_mi, outer_iters=result.iterations, wall_ms=wall,
                scenario_hash=fingerprint,
            ))
    return records, failures


def _mean_se(values):
    arr = np.asarray(values, dtype=float)
    if arr.size < 2:
        return float(arr.mean()), 0.0
    return float(arr.mean()), float(arr.std(ddof=1) / math.sqrt(arr.size))


def _sort_key(rec):
    algo_order = {a.value: i for i, a in enumerate(Algorithm)}
    return (rec.sweep_value, algo_order.get(rec.algorithm, 99), rec.n_antennas, getattr(rec, "seed", 0))


def aggregate(records) -> list:
    groups = {}
    for rec in records:
        groups.setdefault((rec.sweep_var, rec.sweep_value, rec.algorithm, rec.n_antennas), []).append(rec)
    out = []
    for (var, value, algo, n), recs in groups.items():
        obj = _mean_se([r.objective_bits for r in recs])
        rate = _mean_se([r.sum_rate_bits for r in recs])
        mi = _mean_se([r.sensing_mi_bits for r in recs])
        out.append(Aggregate(var, value, algo, n, len(recs), *obj, *rate, *mi,
                             float(np.mean([r.outer_iters for r in recs]))))
    out.sort(key=_sort_key)
    return out


def run_sweep(cfg: ExperimentConfig, progress=None) -> SweepResult:
    """Solve every (sweep value, algorithm, seed, N) combination.

    At a fixed seed index every algorithm and sweep value sees the same
    scenario. Failed solves are collected rather than raised.
    """
    tasks = [(cfg, s, n) for n in cfg.antenna_counts for s in range(cfg.num_seeds)]
    records, failures = [], []
    if cfg.workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = pool.map(_run_task, tasks)
            for i, (recs, fails) in enumerate(results):
                records += recs
                failures += fails
                if progress:
                    progress(i + 1, len(tasks))
    else:
        for i, task in enumerate(tasks):
            recs, fails = _run_task(task)
            records += recs
            failures += fails
            if progress:
                progress(i + 1, len(tasks))
    records.sort(key=_sort_key)
    failures.sort(key=lambda f: (f.sweep_value, f.algorithm, f.n_antennas, f.seed))
    return SweepResult(cfg, records, aggregate(records), failures)


def relative_gains(result: SweepResult, reference: str = Algorithm.BF_FPA.value, proposed: str = Algorithm.SPGA_FBF_MA.value):
    """Mean-objective gain of ``proposed`` over ``reference`` at every sweep value and N."""
    means = {(a.sweep_value, a.algorithm, a.n_antennas): a.objective_mean for a in result.aggregates}
    gains = []
    for (value, algo, n), mean in sorted(means.items()):
        if algo != proposed:
            continue
        base = means.get((value, reference, n))
        if base:
            gains.append({"sweep_value": value, "n_antennas": n, "gain": mean / base - 1.0})
    return gains


def _csv_text(rows, fields) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
    writer.writerow(fields)
    for row in rows:
        writer.writerow([_cell(getattr(row, f)) for f in fields])
    return buf.getvalue()


def _cell(value):
    if isinstance(value, float):
        return repr(value)
    return value


def _write(path: str, text: str):
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _dat_text(result: SweepResult, metric: str) -> str:
    table = result.table(metric)
    keys = sorted(table, key=lambda k: ({a.value: i for i, a in enumerate(Algorithm)}.get(k[0], 99), k[1]))
    values = sorted({a.sweep_value for a in result.aggregates})
    lines = ["# " + " ".join([result.config.sweep_var] + [f"{a}_N{n}" for a, n in keys])]
    for v in values:
        cols = [repr(v)]
        for key in keys:
            xs, means, _ = table[key]
            hit = np.flatnonzero(xs == v)
            cols.append(repr(float(means[hit[0]])) if hit.size else "nan")
        lines.append(" ".join(cols))
    return "\n".join(lines) + "\n"


def emit(result: SweepResult, path: Optional[str] = None) -> dict:
    """Write records, aggregates, plot data, failures and a run manifest.

    Returns a mapping from artifact name to file path.
    """
    out = path or result.config.out
    try:
        os.makedirs(out, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc.strerror or exc}") from exc
    var = result.config.sweep_var
    files = {
        "records": os.path.join(out, "records.csv"),
        "aggregates": os.path.join(out, "aggregates.csv"),
        "failures": os.path.join(out, "failures.csv"),
        "manifest": os.path.join(out, "manifest.json"),
    }
    _write(files["records"], _csv_text(result.records, RECORD_FIELDS))
    _write(files["aggregates"], _csv_text(result.aggregates, AGGREGATE_FIELDS))
    _write(files["failures"], _csv_text(result.failures, [f.name for f in dataclasses.fields(FailedRun)]))
    for metric in ("objective", "sum_rate", "sensing_mi"):
        files[f"plot_{metric}"] = os.path.join(out, f"{var}_{metric}.dat")
        _write(files[f"plot_{metric}"], _dat_text(result, metric))
    from . import kernels

    manifest = {
        "config": result.config.to_dict(),
        "library_version": __version__,
        "kernel_backend": kernels.BACKEND,
        "master_seed": result.config.master_seed,
        "records": len(result.records),
        "failures": len(result.failures),
        "gain_over_fixed_array": relative_gains(result),
        "gain_over_direct_ascent": relative_gains(result, reference=Algorithm.DGA_FBF_MA.value),
    }
    _write(files["manifest"], json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return files


def read_records(path: str) -> list:
    """Parse a records CSV written by :func:`emit`."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [
        SweepRecord(
            seed=int(r["seed"]), sweep_var=r["sweep_var"], sweep_value=float(r["sweep_value"]),
            algorithm=r["algorithm"], n_antennas=int(r["n_antennas"]),
            objective_bits=float(r["objective_bits"]), sum_rate_bits=float(r["sum_rate_bits"]),
            sensing_mi_bits=float(r["sensing_mi_bits"]), outer_iters=int(r["outer_iters"]),
            wall_ms=float(r["wall_ms"]),
        )
        for r in rows
    ]


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path} must hold a JSON object")
    return data
