"""Counting inflection points: common zeros of a curve and its Hessian curve.

The plane is put in a fixed generic unitary position, both polynomials are
dehomogenized, ``y`` is eliminated with a Sylvester resultant (sampled on a
circle and interpolated by FFT), and every root of the resultant is lifted
to a common zero and refined by two-variable Newton iteration.
"""
from __future__ import annotations

import numpy as np

from . import _core
from .errors import IllConditioned
from .projective import HomPoly3, roots_batch
from .rng import RngStream

MAX_DEGREE = 6
_CHART_SEED = 0x1F1EC7


def _generic_unitary() -> np.ndarray:
    g = RngStream(_CHART_SEED).derive("chart").generator()
    A = g.standard_normal((3, 3)) + 1j * g.standard_normal((3, 3))
    Q, R = np.linalg.qr(A)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def _hess_det(hess: np.ndarray) -> np.ndarray:
    a, b, c, ab, ac, bc = (hess[:, i] for i in range(6))
    return a * (b * c - bc * bc) - ab * (ab * c - bc * ac) + ac * (ab * bc - b * ac)


class _Chart:
    def __init__(self, P: HomPoly3, U: np.ndarray):
        self.P = P
        self.U = U
        self.scale = P.norm

    def lift(self, x, y):
        pts = np.stack([np.ones_like(x), x, y], axis=-1)
        return pts @ self.U.T

    def eval(self, x, y):
        x = np.asarray(x, complex)
        y = np.asarray(y, complex)
        X = self.lift(x.ravel(), y.ravel())
        v, _, h = _core.hom_jets(self.P.exponents, self.P.coeffs / self.scale, X)
        return v.reshape(x.shape), _hess_det(h).reshape(x.shape)

    def y_coeffs(self, xs: np.ndarray, deg_p: int, deg_h: int):
        n = max(deg_p, deg_h) + 1
        nodes = np.exp(2j * np.pi * np.arange(n) / n)
        X, Y = np.meshgrid(xs, nodes, indexing="ij")
        pv, hv = self.eval(X, Y)
        pc = np.fft.fft(pv, axis=1) / n
        hc = np.fft.fft(hv, axis=1) / n
        return pc[:, :deg_p + 1], hc[:, :deg_h + 1]


def _sylvester_det(p: np.ndarray, h: np.ndarray) -> np.ndarray:
    # p: (m, a+1), h: (m, b+1) ascending -> det of the (a+b) Sylvester matrix
    m, a1 = p.shape
    b1 = h.shape[1]
    a, b = a1 - 1, b1 - 1
    S = np.zeros((m, a + b, a + b), complex)
    for i in range(b):
        S[:, i, i:i + a + 1] = p[:, ::-1]
    for i in range(a):
        S[:, b + i, i:i + b + 1] = h[:, ::-1]
    return np.linalg.det(S)


def _newton2(chart: _Chart, x: np.ndarray, y: np.ndarray, iters: int = 30):
    step = 1e-6
    for _ in range(iters):
        p, h = chart.eval(x, y)
        px1, hx1 = chart.eval(x + step, y)
        px0, hx0 = chart.eval(x - step, y)
        py1, hy1 = chart.eval(x, y + step)
        py0, hy0 = chart.eval(x, y - step)
        J11, J21 = (px1 - px0) / (2 * step), (hx1 - hx0) / (2 * step)
        J12, J22 = (py1 - py0) / (2 * step), (hy1 - hy0) / (2 * step)
        det = J11 * J22 - J12 * J21
        with np.errstate(divide="ignore", invalid="ignore"):
            dx = (J22 * p - J12 * h) / det
            dy = (J11 * h - J21 * p) / det
        dx = np.where(np.isfinite(dx), dx, 0)
        dy = np.where(np.isfinite(dy), dy, 0)
        x, y = x - dx, y - dy
        if np.all(np.abs(dx) + np.abs(dy) < 1e-14 * (1 + np.abs(x) + np.abs(y))):
            break
    return x, y


def inflection_points(P: HomPoly3, tol: float = 1e-6) -> np.ndarray:
    """Unit representatives of the inflection points of a generic curve ``Z(P)``."""
    d = P.degree
    if not 2 <= d <= MAX_DEGREE:
        raise ValueError(f"inflection counting supports 2 <= d <= {MAX_DEGREE}")
    chart = _Chart(P, _generic_unitary())
    e = 3 * (d - 2)
    if e == 0:
        _, h = chart.eval(np.zeros(1), np.zeros(1))
        if abs(h[0]) < tol:
            raise IllConditioned("conic is degenerate (vanishing Hessian)")
        return np.zeros((0, 3), complex)
    D = d * e
    M = 2 * (D + 1)
    xs = np.exp(2j * np.pi * np.arange(M) / M)
    pc, hc = chart.y_coeffs(xs, d, e)
    R = np.fft.fft(_sylvester_det(pc, hc)) / M
    tail = np.abs(R[D + 1:]).max() if M > D + 1 else 0.0
    if abs(R[D]) <= 10 * tail:
        raise IllConditioned("resultant lost degree in this chart")
    xr, ok = roots_batch(R[:D + 1][None])
    xr = xr[0]
    gap = np.abs(xr[:, None] - xr[None, :]) / np.maximum(1, np.abs(xr))[:, None]
    np.fill_diagonal(gap, np.inf)
    if gap.min() < tol:
        raise IllConditioned("resultant roots cluster below tolerance")
    # lift: for each x, the root y of p(x, .) where the Hessian is smallest
    py, hy = chart.y_coeffs(xr, d, e)
    yr, _ = roots_batch(py)
    _, hv = chart.eval(np.repeat(xr[:, None], d, axis=1), yr)
    y0 = yr[np.arange(D), np.argmin(np.abs(hv), axis=1)]
    x, y = _newton2(chart, xr, y0)
    p, h = chart.eval(x, y)
    X = chart.lift(x, y)
    nrm = np.linalg.norm(X, axis=1)
    good = (np.abs(p) / nrm**d < 1e-9) & (np.abs(h) / nrm ** (3 * (d - 2)) < 1e-9) & np.isfinite(nrm)
    X = X[good] / nrm[good, None]
    distinct: list[np.ndarray] = []
    for v in X:
        if all(1 - abs(np.vdot(w, v)) ** 2 > tol**2 for w in distinct):
            distinct.append(v)
    return np.array(distinct).reshape(-1, 3)


def inflection_count(P: HomPoly3, tol: float = 1e-6) -> int:
    """Number of inflection points (``K = 2*pi``) of ``Z(P)``; generically ``3d(d-2)``.

    Raises
    ------
    IllConditioned
        When roots of the resultant cannot be separated at ``tol``.
    """
    return len(inflection_points(P, tol))
