"""Pure numpy versions of the routines in ``_kernels.pyx``.

Same signatures and in-place conventions; used when the extension is not built.
"""
from __future__ import annotations

import numpy as np


def _ratio(a: np.ndarray, z: np.ndarray) -> np.ndarray:
    # a: (M, n+1) ascending coefficients, z: (M, K) points -> p(z)/p'(z)
    n = a.shape[1] - 1
    inside = np.abs(z) <= 1.0
    zi = np.where(inside, z, 0)
    y = np.where(inside, 0, 1.0 / np.where(inside, 1, z))
    p = np.broadcast_to(a[:, n:n + 1], z.shape).astype(complex)
    dp = np.zeros_like(p)
    q = np.broadcast_to(a[:, 0:1], z.shape).astype(complex)
    dq = np.zeros_like(q)
    for k in range(n - 1, -1, -1):
        dp = dp * zi + p
        p = p * zi + a[:, k:k + 1]
    for k in range(1, n + 1):
        dq = dq * y + q
        q = q * y + a[:, k:k + 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        r_in = p / dp
        r_out = z * q / (n * q - y * dq)
        out = np.where(inside, r_in, r_out)
        out = np.where(np.where(inside, p, q) == 0, 0, out)
    return out


def _aberth_step(a, z, active):
    N = _ratio(a, z)
    diff = z[:, :, None] - z[:, None, :]
    n = z.shape[1]
    diff[:, np.arange(n), np.arange(n)] = np.inf
    with np.errstate(divide="ignore", invalid="ignore"):
        S = np.sum(np.where(diff == 0, 0, 1.0 / diff), axis=2)
        w = N / (1.0 - N * S)
    w = np.where(np.isfinite(w) & active, w, 0)
    return w


def aberth_batch(coeffs, roots, maxiter=200, tol=1e-15):
    a = np.asarray(coeffs)
    M, n1 = a.shape
    conv = np.zeros(M, dtype=np.int8)
    if n1 <= 1:
        conv[:] = 1
        return conv
    z = np.array(roots, dtype=complex)
    active = np.ones(z.shape, dtype=bool)
    for _ in range(maxiter):
        w = _aberth_step(a, z, active)
        z = z - w
        small = np.abs(w) <= tol * np.maximum(1.0, np.abs(z))
        active &= ~small
        if not active.any():
            break
    conv[:] = (~active).all(axis=1)
    roots[...] = z
    return conv


def aberth_chain(coeffs, roots, maxiter=200, tol=1e-15):
    # The warm-started chain is inherently sequential; the numpy path solves
    # every row from scratch with companion eigenvalues instead.
    a = np.asarray(coeffs)
    M, n1 = a.shape
    n = n1 - 1
    conv = np.zeros(M, dtype=np.int8)
    if n < 1:
        conv[:] = 1
        return conv
    lead = a[:, n]
    ok = lead != 0
    comp = np.zeros((M, n, n), dtype=complex)
    if n > 1:
        comp[:, np.arange(1, n), np.arange(n - 1)] = 1
    safe = np.where(ok, lead, 1)
    comp[:, :, n - 1] = -a[:, :n] / safe[:, None]
    z = np.linalg.eigvals(comp)
    newton_polish(a, z, 3)
    roots[...] = z
    conv[:] = ok & np.isfinite(z).all(axis=1)
    return conv


def newton_polish(coeffs, roots, iters=3):
    a = np.asarray(coeffs)
    z = np.array(roots, dtype=complex)
    for _ in range(iters):
        w = _ratio(a, z)
        z = z - np.where(np.isfinite(w), w, 0)
    roots[...] = z


def hom_jets(exps, c, X, val, grad, hess):
    exps = np.asarray(exps)
    c = np.asarray(c)
    X = np.asarray(X)
    d = int(exps.sum(axis=1).max())
    i, j, k = exps[:, 0], exps[:, 1], exps[:, 2]
    pw = X[:, :, None] ** np.arange(d + 1)[None, None, :]  # (P, 3, d+1)

    def take(axis, e, shift):
        idx = np.clip(e - shift, 0, d)
        return pw[:, axis, :][:, idx]

    a0, a1, a2 = take(0, i, 0), take(1, j, 0), take(2, k, 0)
    b0, b1, b2 = i * take(0, i, 1), j * take(1, j, 1), k * take(2, k, 1)
    g0 = i * (i - 1) * take(0, i, 2)
    g1 = j * (j - 1) * take(1, j, 2)
    g2 = k * (k - 1) * take(2, k, 2)
    val[...] = (a0 * a1 * a2) @ c
    grad[:, 0] = (b0 * a1 * a2) @ c
    grad[:, 1] = (a0 * b1 * a2) @ c
    grad[:, 2] = (a0 * a1 * b2) @ c
    hess[:, 0] = (g0 * a1 * a2) @ c
    hess[:, 1] = (a0 * g1 * a2) @ c
    hess[:, 2] = (a0 * a1 * g2) @ c
    hess[:, 3] = (b0 * b1 * a2) @ c
    hess[:, 4] = (b0 * a1 * b2) @ c
    hess[:, 5] = (a0 * b1 * b2) @ c
