# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled position-surrogate kernels; same contract as ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin

cnp.import_array()


cdef void _beam_sums(double xn, const double[::1] betas, const double complex[::1] gains,
                     const cnp.intp_t[::1] offsets, double complex[::1] out) noexcept nogil:
    cdef Py_ssize_t b, p
    cdef double ph
    cdef double complex acc
    for b in range(offsets.shape[0] - 1):
        acc = 0
        for p in range(offsets[b], offsets[b + 1]):
            ph = betas[p] * xn
            acc = acc + gains[p] * (cos(ph) + 1j * sin(ph))
        out[b] = acc


cdef void _rows(const double[::1] x, const double complex[:, ::1] F, const double[::1] betas,
                const double complex[::1] gains, const cnp.intp_t[::1] offsets,
                double complex[:, ::1] V, double complex[:, ::1] R) noexcept nogil:
    cdef Py_ssize_t n, b, j
    cdef Py_ssize_t N = x.shape[0]
    cdef Py_ssize_t B = offsets.shape[0] - 1
    cdef Py_ssize_t J = F.shape[1]
    cdef double complex vc
    for b in range(B):
        for j in range(J):
            R[b, j] = 0
    for n in range(N):
        _beam_sums(x[n], betas, gains, offsets, V[n])
        for b in range(B):
            vc = V[n, b].conjugate()
            for j in range(J):
                R[b, j] = R[b, j] + vc * F[n, j]


cdef double _score(double complex[:, ::1] R, const double complex[:, ::1] W,
                   const double[::1] q) noexcept nogil:
    cdef Py_ssize_t b, j
    cdef double total = 0
    cdef double complex r
    for b in range(R.shape[0]):
        for j in range(R.shape[1]):
            r = R[b, j]
            total += 2 * (r * W[b, j]).real - q[b] * (r.real * r.real + r.imag * r.imag)
    return total


def surrogate_value(x, F, betas, gains, offsets, W, q):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double complex[:, ::1] Fv = np.ascontiguousarray(F, dtype=np.complex128)
    cdef Py_ssize_t N = xv.shape[0]
    cdef Py_ssize_t B = offsets.shape[0] - 1
    cdef double complex[:, ::1] V = np.empty((N, B), dtype=np.complex128)
    cdef double complex[:, ::1] R = np.empty((B, Fv.shape[1]), dtype=np.complex128)
    _rows(xv, Fv, betas, gains, offsets, V, R)
    return _score(R, W, q)


def surrogate_grad(x, F, betas, gains, offsets, W, q):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double complex[:, ::1] Fv = np.ascontiguousarray(F, dtype=np.complex128)
    cdef const double[::1] bv = betas
    cdef const double complex[::1] gv = gains
    cdef const cnp.intp_t[::1] ov = offsets
    cdef const double complex[:, ::1] Wv = W
    cdef const double[::1] qv = q
    cdef Py_ssize_t N = xv.shape[0]
    cdef Py_ssize_t B = ov.shape[0] - 1
    cdef Py_ssize_t J = Fv.shape[1]
    cdef double complex[:, ::1] V = np.empty((N, B), dtype=np.complex128)
    cdef double complex[:, ::1] R = np.empty((B, J), dtype=np.complex128)
    cdef double complex[:, ::1] M = np.empty((B, J), dtype=np.complex128)
    out = np.zeros(N, dtype=np.float64)
    cdef double[::1] g = out
    cdef Py_ssize_t n, b, j, p
    cdef double ph
    cdef double complex dv, acc
    _rows(xv, Fv, bv, gv, ov, V, R)
    with nogil:
        for b in range(B):
            for j in range(J):
                M[b, j] = Wv[b, j] - qv[b] * R[b, j].conjugate()
        for n in range(N):
            for b in range(B):
                dv = 0
                for p in range(ov[b], ov[b + 1]):
                    ph = bv[p] * xv[n]
                    dv = dv + gv[p] * bv[p] * (-sin(ph) + 1j * cos(ph))
                acc = 0
                for j in range(J):
                    acc = acc + Fv[n, j] * M[b, j]
                g[n] += 2 * (dv.conjugate() * acc).real
    return out


def scan_antenna(x, Py_ssize_t n, candidates, F, betas, gains, offsets, W, q):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] cv = np.ascontiguousarray(candidates, dtype=np.float64)
    cdef const double complex[:, ::1] Fv = np.ascontiguousarray(F, dtype=np.complex128)
    cdef const double[::1] bv = betas
    cdef const double complex[::1] gv = gains
    cdef const cnp.intp_t[::1] ov = offsets
    cdef const double complex[:, ::1] Wv = W
    cdef const double[::1] qv = q
    cdef Py_ssize_t N = xv.shape[0]
    cdef Py_ssize_t B = ov.shape[0] - 1
    cdef Py_ssize_t J = Fv.shape[1]
    cdef Py_ssize_t M = cv.shape[0]
    cdef double complex[:, ::1] V = np.empty((N, B), dtype=np.complex128)
    cdef double complex[:, ::1] R = np.empty((B, J), dtype=np.complex128)
    cdef double complex[:, ::1] Rc = np.empty((B, J), dtype=np.complex128)
    cdef double complex[::1] vc = np.empty(B, dtype=np.complex128)
    out = np.empty(M, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t m, b, j
    cdef double complex w
    _rows(xv, Fv, bv, gv, ov, V, R)
    with nogil:
        for b in range(B):
            w = V[n, b].conjugate()
            for j in range(J):
                R[b, j] = R[b, j] - w * Fv[n, j]
        for m in range(M):
            _beam_sums(cv[m], bv, gv, ov, vc)
            for b in range(B):
                w = vc[b].conjugate()
                for j in range(J):
                    Rc[b, j] = R[b, j] + w * Fv[n, j]
            o[m] = _score(Rc, Wv, qv)
    return out


def armijo_coordinate(x, Py_ssize_t n, double g, double f0, double kappa0, double shrink,
                      double slope, Py_ssize_t max_backtracks, F, betas, gains, offsets, W, q):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double complex[:, ::1] Fv = np.ascontiguousarray(F, dtype=np.complex128)
    cdef const double[::1] bv = betas
    cdef const double complex[::1] gv = gains
    cdef const cnp.intp_t[::1] ov = offsets
    cdef const double complex[:, ::1] Wv = W
    cdef const double[::1] qv = q
    cdef Py_ssize_t N = xv.shape[0]
    cdef Py_ssize_t B = ov.shape[0] - 1
    cdef Py_ssize_t J = Fv.shape[1]
    cdef double complex[:, ::1] V = np.empty((N, B), dtype=np.complex128)
    cdef double complex[:, ::1] R = np.empty((B, J), dtype=np.complex128)
    cdef double complex[:, ::1] Rc = np.empty((B, J), dtype=np.complex128)
    cdef double complex[::1] vc = np.empty(B, dtype=np.complex128)
    cdef Py_ssize_t t, b, j
    cdef double complex w
    cdef double kappa = kappa0
    cdef double value = f0
    cdef bint found = False
    _rows(xv, Fv, bv, gv, ov, V, R)
    with nogil:
        for b in range(B):
            w = V[n, b].conjugate()
            for j in range(J):
                R[b, j] = R[b, j] - w * Fv[n, j]
        for t in range(max_backtracks):
            _beam_sums(xv[n] + kappa * g, bv, gv, ov, vc)
            for b in range(B):
                w = vc[b].conjugate()
                for j in range(J):
                    Rc[b, j] = R[b, j] + w * Fv[n, j]
            value = _score(Rc, Wv, qv)
            if value >= f0 + slope * kappa * g * g:
                found = True
                break
            kappa = kappa * shrink
    if found:
        return kappa, value
    return 0.0, f0


def coordinate_ascent(x, Py_ssize_t max_sweeps, double tol, double kappa0, double shrink,
                      double slope, Py_ssize_t max_backtracks, F, betas, gains, offsets, W, q):
    out = np.array(x, dtype=np.float64)
    cdef double[::1] xv = out
    cdef const double complex[:, ::1] Fv = np.ascontiguousarray(F, dtype=np.complex128)
    cdef const double[::1] bv = betas
    cdef const double complex[::1] gv = gains
    cdef const cnp.intp_t[::1] ov = offsets
    cdef const double complex[:, ::1] Wv = W
    cdef const double[::1] qv = q
    cdef Py_ssize_t N = xv.shape[0]
    cdef Py_ssize_t B = ov.shape[0] - 1
    cdef Py_ssize_t J = Fv.shape[1]
    cdef double complex[:, ::1] V = np.empty((N, B), dtype=np.complex128)
    cdef double complex[:, ::1] R = np.empty((B, J), dtype=np.complex128)
    cdef double complex[:, ::1] R0 = np.empty((B, J), dtype=np.complex128)
    cdef double complex[:, ::1] Rc = np.empty((B, J), dtype=np.complex128)
    cdef double complex[::1] vc = np.empty(B, dtype=np.complex128)
    cdef Py_ssize_t sweep, n, b, j, p, t
    cdef double f, g, kappa, value, largest, ph, z
    cdef double complex w, dv, acc
    _rows(xv, Fv, bv, gv, ov, V, R)
    f = _score(R, Wv, qv)
    with nogil:
        for sweep in range(max_sweeps):
            largest = 0
            for n in range(N):
                g = 0
                for b in range(B):
                    dv = 0
                    for p in range(ov[b], ov[b + 1]):
                        ph = bv[p] * xv[n]
                        dv = dv + gv[p] * bv[p] * (-sin(ph) + 1j * cos(ph))
                    acc = 0
                    for j in range(J):
                        acc = acc + Fv[n, j] * (Wv[b, j] - qv[b] * R[b, j].conjugate())
                    g += 2 * (dv.conjugate() * acc).real
                if g == 0:
                    continue
                for b in range(B):
                    w = V[n, b].conjugate()
                    for j in range(J):
                        R0[b, j] = R[b, j] - w * Fv[n, j]
                kappa = kappa0
                for t in range(max_backtracks):
                    z = xv[n] + kappa * g
                    _beam_sums(z, bv, gv, ov, vc)
                    for b in range(B):
                        w = vc[b].conjugate()
                        for j in range(J):
                            Rc[b, j] = R0[b, j] + w * Fv[n, j]
                    value = _score(Rc, Wv, qv)
                    if value >= f + slope * kappa * g * g:
                        xv[n] = z
                        f = value
                        for b in range(B):
                            V[n, b] = vc[b]
                            for j in range(J):
                                R[b, j] = Rc[b, j]
                        if kappa * abs(g) > largest:
                            largest = kappa * abs(g)
                        break
                    kappa = kappa * shrink
            if largest < tol:
                break
    return out
