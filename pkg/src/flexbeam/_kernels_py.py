"""Pure numpy versions of the position-surrogate kernels.

A "beam" ``b`` is a gain-weighted sum of steering vectors
``v_b(x)[n] = sum_p gains[p] * exp(1j * betas[p] * x[n])`` over the paths
``p`` in ``offsets[b]:offsets[b+1]``. With ``r_b = v_b(x)^H F`` the kernels
evaluate ``sum_b 2 Re{r_b . W[b]} - q[b] * ||r_b||^2``.
"""

import numpy as np


def _beams(x, betas, gains, offsets):
    E = np.exp(1j * np.multiply.outer(x, betas)) * gains
    starts = offsets[:-1]
    return E, np.add.reduceat(E, starts, axis=-1)


def _score(R, W, q):
    return 2 * np.sum((R * W).real, axis=(-2, -1)) - np.sum(q[:, None] * (R.real**2 + R.imag**2), axis=(-2, -1))


def surrogate_value(x, F, betas, gains, offsets, W, q):
    _, V = _beams(x, betas, gains, offsets)
    R = V.conj().T @ F
    return float(_score(R, W, q))


def surrogate_grad(x, F, betas, gains, offsets, W, q):
    E, V = _beams(x, betas, gains, offsets)
    dV = np.add.reduceat(E * (1j * betas), offsets[:-1], axis=1)
    R = V.conj().T @ F
    M = W - q[:, None] * R.conj()
    G = F @ M.T
    return 2 * np.sum((dV.conj() * G).real, axis=1)


def scan_antenna(x, n, candidates, F, betas, gains, offsets, W, q):
    _, V = _beams(x, betas, gains, offsets)
    R = V.conj().T @ F
    R0 = R - np.outer(V[n].conj(), F[n])
    _, Vc = _beams(np.asarray(candidates, dtype=float), betas, gains, offsets)
    Rc = R0[None] + Vc.conj()[:, :, None] * F[n][None, None, :]
    return _score(Rc, W, q)


def armijo_coordinate(x, n, g, f0, kappa0, shrink, slope, max_backtracks, F, betas, gains, offsets, W, q):
    """Backtracking search along coordinate ``n`` with slope ``g``.

    Returns ``(kappa, value)`` for the first step ``kappa0 * shrink**t`` that
    passes the sufficient-increase test, or ``(0.0, f0)`` when none does.
    """
    kappas = kappa0 * shrink ** np.arange(max_backtracks)
    values = scan_antenna(x, n, x[n] + kappas * g, F, betas, gains, offsets, W, q)
    ok = np.flatnonzero(values >= f0 + slope * kappas * g * g)
    if ok.size == 0:
        return 0.0, f0
    t = ok[0]
    return float(kappas[t]), float(values[t])


def coordinate_ascent(x, max_sweeps, tol, kappa0, shrink, slope, max_backtracks, F, betas, gains, offsets, W, q):
    """Gauss-Seidel sweeps of Armijo steps, one coordinate at a time."""
    x = np.array(x, dtype=float)
    f = surrogate_value(x, F, betas, gains, offsets, W, q)
    for _ in range(max_sweeps):
        largest = 0.0
        for n in range(len(x)):
            g = surrogate_grad(x, F, betas, gains, offsets, W, q)[n]
            if g == 0.0:
                continue
            kappa, f_new = armijo_coordinate(
                x, n, g, f, kappa0, shrink, slope, max_backtracks, F, betas, gains, offsets, W, q
            )
            if kappa == 0.0:
                continue
            x[n] += kappa * g
            f = f_new
            largest = max(largest, abs(kappa * g))
        if largest < tol:
            break
    return x
