"""Backend selection for the hot kernels.

The Cython extension ``randcurv._kernels`` is used when it has been built;
otherwise the numpy implementations in ``randcurv._fallback`` take over.
``BACKEND`` records which one was picked.
"""
from __future__ import annotations

import numpy as np

from . import _fallback

try:
    from . import _kernels as _impl
    BACKEND = "compiled"
except ImportError:  # extension not built
    _impl = _fallback
    BACKEND = "python"


def backend_module(name: str | None = None):
    if name is None:
        return _impl
    if name == "python":
        return _fallback
    if name == "compiled":
        from . import _kernels
        return _kernels
    raise ValueError(f"unknown backend {name!r}")


def initial_guess(coeffs: np.ndarray) -> np.ndarray:
    """Starting points on a circle whose radius is the geometric mean of the root moduli."""
    a = np.atleast_2d(coeffs)
    n = a.shape[1] - 1
    with np.errstate(divide="ignore"):
        lo = np.abs(a[:, 0])
        hi = np.abs(a[:, n])
        rho = np.where((lo > 0) & (hi > 0), (lo / np.where(hi > 0, hi, 1)) ** (1.0 / max(n, 1)), 1.0)
    rho = np.clip(rho, 1e-8, 1e8)
    ang = 2 * np.pi * np.arange(n) / max(n, 1) + 0.7
    return rho[:, None] * np.exp(1j * ang)[None, :]


def aberth(coeffs, init=None, maxiter: int = 200, tol: float = 1e-15, backend: str | None = None):
    """Batched Aberth-Ehrlich roots of ascending-coefficient polynomials.

    Returns ``(roots, converged)`` with shapes ``(M, n)`` and ``(M,)``.
    """
    a = np.ascontiguousarray(np.atleast_2d(coeffs), dtype=complex)
    z = np.ascontiguousarray(initial_guess(a) if init is None else np.atleast_2d(init), dtype=complex).copy()
    conv = backend_module(backend).aberth_batch(a, z, maxiter, tol)
    return z, np.asarray(conv, dtype=bool)


def aberth_chain(coeffs, init=None, maxiter: int = 200, tol: float = 1e-15, backend: str | None = None):
    """Roots of a sequence of slowly varying polynomials, each warm-started from the last."""
    a = np.ascontiguousarray(np.atleast_2d(coeffs), dtype=complex)
    z = np.zeros((a.shape[0], a.shape[1] - 1), dtype=complex)
    z[0] = initial_guess(a[:1])[0] if init is None else init
    conv = backend_module(backend).aberth_chain(a, z, maxiter, tol)
    return z, np.asarray(conv, dtype=bool)


def newton_polish(coeffs, roots, iters: int = 3, backend: str | None = None) -> np.ndarray:
    a = np.ascontiguousarray(np.atleast_2d(coeffs), dtype=complex)
    z = np.ascontiguousarray(np.atleast_2d(roots), dtype=complex).copy()
    backend_module(backend).newton_polish(a, z, iters)
    return z


def hom_jets(exps, coeffs, X, backend: str | None = None):
    """Value ``(P,)``, gradient ``(P, 3)`` and Hessian ``(P, 6)`` at points ``X``."""
    X = np.ascontiguousarray(np.atleast_2d(X), dtype=complex)
    P = X.shape[0]
    val = np.empty(P, dtype=complex)
    grad = np.empty((P, 3), dtype=complex)
    hess = np.empty((P, 6), dtype=complex)
    backend_module(backend).hom_jets(np.ascontiguousarray(exps, dtype=np.int_),
                                     np.ascontiguousarray(coeffs, dtype=complex), X, val, grad, hess)
    return val, grad, hess
