"""Command-line entry point.

Exit codes: 0 success, 1 a solve or check failed, 2 bad configuration.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import FlexbeamError
from .harness import ConfigError, ExperimentConfig, emit, figure_defaults, load_config, relative_gains, run_sweep

SWEEP_COMMANDS = {
    "sweep-power": "power_dbm",
    "sweep-region": "region_lambda",
    "sweep-tradeoff": "comm_weight",
}


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="flexbeam", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON file with ExperimentConfig fields")
        p.add_argument("--seeds", type=int, help="number of Monte Carlo seeds")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, help="master seed (else $FLEXBEAM_SEED)")
        p.add_argument("--workers", type=int, help="parallel solver processes")
        p.add_argument("--print-config", action="store_true", help="print the effective config and exit")

    run = sub.add_parser("run", help="solve one scenario and print its metrics")
    common(run)
    run.add_argument("--antennas", type=int, help="number of antennas")
    run.add_argument("--power-dbm", type=float)
    run.add_argument("--region-lambda", type=float)
    run.add_argument("--comm-weight", type=float)
    run.add_argument("--algorithm", action="append", help="algorithm name; repeatable")
    for name, var in SWEEP_COMMANDS.items():
        common(sub.add_parser(name, help=f"Monte Carlo sweep over {var}"))
    verify = sub.add_parser("verify", help="run the oracle cross-checks")
    common(verify)
    verify.add_argument("--quick", action="store_true", help="reduced instance counts")
    return parser


def _effective_config(args, sweep_var=None) -> ExperimentConfig:
    base = figure_defaults(sweep_var or "power_dbm").to_dict()
    if args.config:
        data = load_config(args.config)
        if sweep_var and data.get("sweep_var", sweep_var) != sweep_var:
            raise ConfigError(f"{args.command} sweeps {sweep_var}, config asks for {data['sweep_var']}")
        base.update(data)
    overrides = {}
    if args.seeds is not None:
        overrides["num_seeds"] = args.seeds
    if args.out is not None:
        overrides["out"] = args.out
    if args.workers is not None:
        overrides["workers"] = args.workers
    seed = args.seed
    if seed is None and os.environ.get("FLEXBEAM_SEED"):
        try:
            seed = int(os.environ["FLEXBEAM_SEED"])
        except ValueError:
            raise ConfigError("FLEXBEAM_SEED must be an integer") from None
    if seed is not None:
        overrides["master_seed"] = seed
    for flag, key in (("power_dbm", "power_dbm"), ("region_lambda", "region_lambda"), ("comm_weight", "comm_weight")):
        value = getattr(args, flag, None)
        if value is not None:
            overrides[key] = value
    if getattr(args, "antennas", None) is not None:
        overrides["antenna_counts"] = [args.antennas]
    if getattr(args, "algorithm", None):
        overrides["algorithms"] = args.algorithm
    return ExperimentConfig.from_dict({**base, **overrides})


def _cmd_run(cfg: ExperimentConfig) -> int:
    from .model import generate_scenario, substream_seed
    from .solver import Algorithm, solve

    n = cfg.antenna_counts[0]
    scenario = generate_scenario(substream_seed(cfg.master_seed, 0), cfg.scenario_params(n))
    geometry = cfg.geometry(n)
    status = 0
    for name in cfg.algorithms:
        try:
            result = solve(scenario, geometry, cfg.solver_config(None, Algorithm(name)))
        except FlexbeamError as exc:
            print(f"{name}: failed: {exc}", file=sys.stderr)
            status = 1
            continue
        m = result.metrics
        print(json.dumps({
            "algorithm": name,
            "objective_bits": m.objective,
            "sum_rate_bits": m.sum_rate,
            "sensing_mi_bits": m.sensing_mi,
            "sinr": [float(v) for v in m.sinr],
            "scnr": float(m.scnr),
            "positions_lambda": [float(v) for v in result.positions / cfg.wavelength],
            "outer_iters": result.iterations,
        }))
    return status


def _cmd_sweep(cfg: ExperimentConfig) -> int:
    def progress(done, total):
        print(f"\r{done}/{total} seed batches", end="", file=sys.stderr, flush=True)

    result = run_sweep(cfg, progress=progress)
    print(file=sys.stderr)
    files = emit(result)
    for agg in result.aggregates:
        print(f"{agg.sweep_var}={agg.sweep_value:g} {agg.algorithm} N={agg.n_antennas}: "
              f"{agg.objective_mean:.4f} +/- {agg.objective_se:.4f} bits")
    for gain in relative_gains(result):
        print(f"gain over fixed array at {cfg.sweep_var}={gain['sweep_value']:g}, "
              f"N={gain['n_antennas']}: {gain['gain']:+.1%}")
    print(f"wrote {files['records']}")
    if result.failures:
        print(f"{len(result.failures)} solves failed; see {files['failures']}", file=sys.stderr)
        return 1
    return 0


def _cmd_verify(quick: bool) -> int:
    from .verify import run_all

    results = run_all(quick=quick)
    for res in results:
        print(res.line())
    return 0 if all(r.passed for r in results) else 1


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    sweep_var = SWEEP_COMMANDS.get(args.command)
    try:
        cfg = _effective_config(args, sweep_var)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.print_config:
        print(json.dumps(cfg.to_dict(), indent=2, sort_keys=True))
        return 0
    try:
        if args.command == "run":
            return _cmd_run(cfg)
        if args.command == "verify":
            return _cmd_verify(args.quick)
        return _cmd_sweep(cfg)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
