# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops: simultaneous root iteration, Newton polishing and
monomial jet evaluation.  ``randcurv._fallback`` mirrors every function here
in numpy; ``randcurv._core`` picks one at import time.

Polynomial coefficients are stored in ascending order, ``a[0] + a[1] s + ...``.
"""
import numpy as np

cdef extern from "complex.h" nogil:
    double cabs(double complex)

cdef double PI = 3.14159265358979323846


cdef inline double complex _ratio(const double complex[:] a, int n, double complex z) noexcept nogil:
    # p(z)/p'(z); evaluated through the reversed polynomial when |z| > 1
    cdef double complex p, dp, y
    cdef int k
    if cabs(z) <= 1.0:
        p = a[n]
        dp = 0
        for k in range(n - 1, -1, -1):
            dp = dp * z + p
            p = p * z + a[k]
        if p == 0:
            return 0
        return p / dp
    y = 1.0 / z
    p = a[0]
    dp = 0
    for k in range(1, n + 1):
        dp = dp * y + p
        p = p * y + a[k]
    if p == 0:
        return 0
    return z * p / (n * p - y * dp)


cdef int _aberth_one(const double complex[:] a, int n, double complex[:] z,
                     char* done, int maxiter, double tol) noexcept nogil:
    cdef int it, k, j, left
    cdef double complex N, S, w, d
    for k in range(n):
        done[k] = 0
    for it in range(maxiter):
        left = 0
        for k in range(n):
            if done[k]:
                continue
            N = _ratio(a, n, z[k])
            S = 0
            for j in range(n):
                if j != k:
                    d = z[k] - z[j]
                    if d != 0:
                        S = S + 1.0 / d
            w = N / (1.0 - N * S)
            if w != w:
                w = 0
            z[k] = z[k] - w
            if cabs(w) <= tol * (1.0 if cabs(z[k]) < 1.0 else cabs(z[k])):
                done[k] = 1
            else:
                left += 1
        if left == 0:
            return 1
    return 0


def aberth_batch(const double complex[:, :] coeffs, double complex[:, :] roots,
                 int maxiter=200, double tol=1e-15):
    """Independent Aberth-Ehrlich solves, row by row, refining ``roots`` in place."""
    cdef Py_ssize_t m, M = coeffs.shape[0]
    cdef int n = coeffs.shape[1] - 1
    conv = np.zeros(M, dtype=np.int8)
    cdef signed char[:] cv = conv
    done_buf = np.zeros(max(n, 1), dtype=np.int8)
    cdef char[:] done = done_buf
    with nogil:
        for m in range(M):
            cv[m] = _aberth_one(coeffs[m], n, roots[m], &done[0], maxiter, tol)
    return conv


def aberth_chain(const double complex[:, :] coeffs, double complex[:, :] roots,
                 int maxiter=200, double tol=1e-15):
    """Sequential solves where row ``m`` starts from the converged roots of row ``m-1``.

    ``roots[0]`` holds the initial guess for the first row; the remaining rows
    are overwritten.
    """
    cdef Py_ssize_t m, k, M = coeffs.shape[0]
    cdef int n = coeffs.shape[1] - 1
    conv = np.zeros(M, dtype=np.int8)
    cdef signed char[:] cv = conv
    done_buf = np.zeros(max(n, 1), dtype=np.int8)
    cdef char[:] done = done_buf
    with nogil:
        for m in range(M):
            if m > 0:
                for k in range(n):
                    roots[m, k] = roots[m - 1, k]
            cv[m] = _aberth_one(coeffs[m], n, roots[m], &done[0], maxiter, tol)
    return conv


def newton_polish(const double complex[:, :] coeffs, double complex[:, :] roots, int iters=3):
    """A few Newton steps on every root, in place."""
    cdef Py_ssize_t m, k, M = coeffs.shape[0]
    cdef int it, n = coeffs.shape[1] - 1
    cdef double complex w
    with nogil:
        for m in range(M):
            for k in range(roots.shape[1]):
                for it in range(iters):
                    w = _ratio(coeffs[m], n, roots[m, k])
                    if w != w or cabs(w) == 0:
                        break
                    roots[m, k] = roots[m, k] - w


def hom_jets(const long[:, :] exps, const double complex[:] c, const double complex[:, :] X,
             double complex[:] val, double complex[:, :] grad, double complex[:, :] hess):
    """Value, gradient and Hessian of a homogeneous cubic-variable polynomial.

    ``hess`` columns are ordered (00, 11, 22, 01, 02, 12).
    """
    cdef Py_ssize_t p, t, P = X.shape[0], T = exps.shape[0]
    cdef int d = 0, e, i, j, k
    for t in range(T):
        e = exps[t, 0] + exps[t, 1] + exps[t, 2]
        if e > d:
            d = e
    pw_buf = np.empty((3, d + 1), dtype=np.complex128)
    cdef double complex[:, :] pw = pw_buf
    cdef double complex ci, a0, a1, a2, b0, b1, b2, g0, g1, g2
    with nogil:
        for p in range(P):
            for e in range(3):
                pw[e, 0] = 1
                for i in range(1, d + 1):
                    pw[e, i] = pw[e, i - 1] * X[p, e]
            val[p] = 0
            for e in range(3):
                grad[p, e] = 0
            for e in range(6):
                hess[p, e] = 0
            for t in range(T):
                i = exps[t, 0]
                j = exps[t, 1]
                k = exps[t, 2]
                ci = c[t]
                a0 = pw[0, i]
                a1 = pw[1, j]
                a2 = pw[2, k]
                b0 = i * pw[0, i - 1] if i > 0 else 0
                b1 = j * pw[1, j - 1] if j > 0 else 0
                b2 = k * pw[2, k - 1] if k > 0 else 0
                val[p] += ci * a0 * a1 * a2
                grad[p, 0] += ci * b0 * a1 * a2
                grad[p, 1] += ci * a0 * b1 * a2
                grad[p, 2] += ci * a0 * a1 * b2
                g0 = i * (i - 1) * pw[0, i - 2] if i > 1 else 0
                g1 = j * (j - 1) * pw[1, j - 2] if j > 1 else 0
                g2 = k * (k - 1) * pw[2, k - 2] if k > 1 else 0
                hess[p, 0] += ci * g0 * a1 * a2
                hess[p, 1] += ci * a0 * g1 * a2
                hess[p, 2] += ci * a0 * a1 * g2
                hess[p, 3] += ci * b0 * b1 * a2
                hess[p, 4] += ci * b0 * a1 * b2
                hess[p, 5] += ci * a0 * b1 * b2
