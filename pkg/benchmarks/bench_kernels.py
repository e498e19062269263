"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Runs each kernel on a realistic surrogate (4 users, 3 clutters, 13 paths)
and one full SPGA solve with each backend.
"""

import argparse
import timeit

import numpy as np

from flexbeam import fp_core, kernels, position_opt, solver
from flexbeam.metrics import Weights
from flexbeam.model import ArrayGeometry, ScenarioParams, generate_scenario, ula_positions


def surrogate(n):
    sc = generate_scenario(1, ScenarioParams(num_antennas=n))
    x = ula_positions(n, 0.05)
    rng = np.random.default_rng(1)
    F = rng.standard_normal((n, sc.num_users + 1)) + 1j * rng.standard_normal((n, sc.num_users + 1))
    aux = fp_core.initial_aux(F, x, sc, Weights(0.5))
    return position_opt.PositionSurrogate(F, aux, sc, Weights(0.5)), x


def cases(backend, s, x):
    args = s._args()
    cand = np.linspace(0.0, 1.0, 201)
    cfg = position_opt.PositionOptConfig().resolved(0.1)
    run = (cfg.ascent_max_iters, cfg.ascent_tol, cfg.initial_step, cfg.armijo_shrink,
           cfg.armijo_slope, cfg.max_backtracks)
    return {
        "value": lambda: backend.surrogate_value(x, *args),
        "grad": lambda: backend.surrogate_grad(x, *args),
        "scan 201 points": lambda: backend.scan_antenna(x, 0, cand, *args),
        "coordinate ascent": lambda: backend.coordinate_ascent(x.copy(), *run, *args),
    }


def time_solve(backend, sc, geo, repeat):
    saved = {name: getattr(kernels, name) for name in
             ("surrogate_value", "surrogate_grad", "scan_antenna", "armijo_coordinate", "coordinate_ascent")}
    for name in saved:
        setattr(kernels, name, getattr(backend, name))
    try:
        return min(timeit.repeat(lambda: solver.solve(sc, geo), number=1, repeat=repeat))
    finally:
        for name, fn in saved.items():
            setattr(kernels, name, fn)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if kernels.compiled_backend is None:
        raise SystemExit("compiled extension not available; install the package with a C compiler")
    backends = {"cython": kernels.compiled_backend, "numpy": kernels.py_backend}
    print(f"{'kernel':<28}{'cython':>12}{'numpy':>12}{'speedup':>10}")
    for n in (4, 8):
        s, x = surrogate(n)
        per = {b: cases(mod, s, x) for b, mod in backends.items()}
        for name in per["cython"]:
            t = {}
            for b in backends:
                timer = timeit.Timer(per[b][name])
                loops, _ = timer.autorange()
                t[b] = min(timer.repeat(args.repeat, loops)) / loops
            print(f"{name + f' (N={n})':<28}{t['cython'] * 1e6:>10.1f}us{t['numpy'] * 1e6:>10.1f}us{t['numpy'] / t['cython']:>9.1f}x")
    sc = generate_scenario(3, ScenarioParams(num_antennas=4))
    geo = ArrayGeometry(ula_positions(4, 0.05), 0.0, 1.0, 0.05)
    t = {b: time_solve(mod, sc, geo, args.repeat) for b, mod in backends.items()}
    print(f"{'SPGA solve (N=4)':<28}{t['cython'] * 1e3:>10.1f}ms{t['numpy'] * 1e3:>10.1f}ms{t['numpy'] / t['cython']:>9.1f}x")


if __name__ == "__main__":
    main()
