"""Rescaled Bergman kernel of the degree-d plane ensemble against the Bargmann-Fock kernel.

Both kernels are compared through their normalized moduli.  In the affine
chart the degree-d kernel gives
``|1 + <z, w>|^d / ((1 + |z|^2)(1 + |w|^2))^(d/2)``; evaluated at ``z c/sqrt(d)``
with ``c = sqrt(pi)`` it tends to ``exp(-(pi/2)|z - w|^2)`` at rate ``1/d``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .rng import RngStream

SCALE = math.sqrt(math.pi)
FD_STEP = 1e-3


def _herm(z, w):
    return np.sum(np.asarray(z) * np.conj(np.asarray(w)), axis=-1)


def fs_normalized_kernel(d: int, z, w):
    """Normalized modulus of the degree-``d`` Bergman kernel between affine points."""
    z = np.asarray(z, complex)
    w = np.asarray(w, complex)
    nz = np.sum(np.abs(z) ** 2, axis=-1)
    nw = np.sum(np.abs(w) ** 2, axis=-1)
    # base <= 1 (Cauchy-Schwarz), so the power cannot overflow; sqrt(x*x) == x keeps the diagonal exact
    base = np.abs(1 + _herm(z, w)) / np.sqrt((1 + nz) * (1 + nw))
    return np.minimum(base, 1.0) ** d


def bf_kernel_modulus(z, w):
    """``exp(-(pi/2)|z - w|^2)``."""
    z = np.asarray(z, complex)
    w = np.asarray(w, complex)
    return np.exp(-0.5 * math.pi * np.sum(np.abs(z - w) ** 2, axis=-1))


@dataclass(frozen=True)
class KernelComparison:
    d: int
    sup_err: float
    k: int = 0
    scale_constant: float = SCALE
    n_pairs: int = 0


def ball_pairs(n: int, stream: RngStream, radius: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """``n`` pairs of points uniform in the radius-``radius`` ball of C^2 (as R^4)."""
    g = stream.generator()

    def draw():
        x = g.standard_normal((n, 4))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        x *= radius * g.random(n)[:, None] ** 0.25
        return x[:, :2] + 1j * x[:, 2:]

    return draw(), draw()


def _fd_gradient(f, z, w, h):
    """Real gradient of ``f(z, w)`` in the four real coordinates of ``z``."""
    out = []
    for k in range(2):
        for unit in (1.0, 1j):
            dz = np.zeros_like(z)
            dz[:, k] = unit * h
            out.append((f(z + dz, w) - f(z - dz, w)) / (2 * h))
    return np.stack(out, axis=-1)


def _fd_hessian(f, z, w, h):
    dirs = []
    for k in range(2):
        for unit in (1.0, 1j):
            dz = np.zeros_like(z)
            dz[:, k] = unit * h
            dirs.append(dz)
    f0 = f(z, w)
    H = np.empty(z.shape[:1] + (4, 4))
    for i, a in enumerate(dirs):
        for j, b in enumerate(dirs):
            if j < i:
                H[:, i, j] = H[:, j, i]
                continue
            if i == j:
                H[:, i, i] = (f(z + a, w) - 2 * f0 + f(z - a, w)) / (h * h)
            else:
                H[:, i, j] = (f(z + a + b, w) - f(z + a - b, w) - f(z - a + b, w) + f(z - a - b, w)) / (4 * h * h)
    return H


def _sup_err(d: int, z, w, k: int) -> float:
    s = SCALE / math.sqrt(d)

    def fs(a, b):
        return fs_normalized_kernel(d, a * s, b * s)

    if k == 0:
        err = np.abs(fs(z, w) - bf_kernel_modulus(z, w))
    elif k == 1:
        err = np.abs(_fd_gradient(fs, z, w, FD_STEP) - _fd_gradient(bf_kernel_modulus, z, w, FD_STEP)).max(axis=-1)
    elif k == 2:
        err = np.abs(_fd_hessian(fs, z, w, FD_STEP) - _fd_hessian(bf_kernel_modulus, z, w, FD_STEP)).max(axis=(-2, -1))
    else:
        raise ValueError("k must be 0, 1 or 2")
    return float(err.max())


def kernel_convergence(d_list, n_pairs: int = 1000, stream: RngStream | None = None, k: int = 0) -> list[KernelComparison]:
    """Sup error over ball pairs between the rescaled degree-d kernel and the Bargmann-Fock kernel.

    Derivatives (``k = 1, 2``) are taken by central differences in the
    Bargmann-Fock coordinates, where the expected rate is ``d^(k/2 - 1)``
    once the chain-rule factor ``(sqrt(d)/c)^k`` is folded back into
    unrescaled coordinates.
    """
    d_list = [int(d) for d in d_list]
    if any(b <= a for a, b in zip(d_list, d_list[1:])):
        raise ValueError("d_list must be increasing")
    stream = RngStream(0) if stream is None else stream
    z, w = ball_pairs(n_pairs, stream.derive("pairs"))
    out = []
    for d in d_list:
        err = _sup_err(d, z, w, k) * (math.sqrt(d) / SCALE) ** k
        out.append(KernelComparison(d, err, k, SCALE, n_pairs))
    return out


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    residual: float
    degrees: list = field(default_factory=list)


def rate_fit(comparisons) -> RateFit:
    """Least-squares fit of ``log sup_err`` against ``log d``."""
    if len(comparisons) < 3:
        raise ValueError("need at least 3 degrees")
    x = np.log([c.d for c in comparisons])
    y = np.log([c.sup_err for c in comparisons])
    (slope, icpt), res, *_ = np.polyfit(x, y, 1, full=True)
    resid = float(np.sqrt(res[0] / len(x))) if len(res) else 0.0
    return RateFit(float(slope), float(icpt), resid, [c.d for c in comparisons])
