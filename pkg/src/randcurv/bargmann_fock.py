"""Truncated Bargmann-Fock fields on C^2 and flat curvature of their zero sets.

The field is represented by its holomorphic part
``f(z, w) = sum a_ij sqrt(pi^(i+j) / (i! j!)) z^i w^j`` (``i + j <= N``); the
Gaussian factor ``exp(-pi |.|^2 / 2)`` does not move the zero set.  Areas
are Lebesgue areas (dx dy) and curvature follows the flat jet formula
``K = -V``.

Zero-set integrals use a graph-branch quadrature: a polar grid in ``t = |z|^2``
and ``arg z`` on the z-disc; at every node all roots ``w`` of ``f(z, .)`` are
found and each branch inside the ball contributes ``(1 + |dw/dz|^2)`` times
the node's cell area.  Cells cut by the sphere are clipped to first order
and their sample point is moved to the centre of the inside part.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import _core
from .curvature import MAX_DISCARD_FRACTION, CurvatureBand, Estimate, vitter_parts
from .errors import BranchFailure, TooManyDiscards
from .projective import Jet2
from .rng import RngStream, map_ordered, sample_cn

BRANCH_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class BFPoly:
    """Bivariate polynomial ``sum C[i, j] z^i w^j``; ``trunc`` bounds the total degree."""

    trunc: int
    coeffs: np.ndarray
    cov_error_bound: float = 0.0

    @property
    def w_degree(self) -> int:
        nz = np.flatnonzero(np.abs(self.coeffs).max(axis=0) > 0)
        return int(nz[-1]) if len(nz) else 0

    def __sub__(self, other: "BFPoly") -> "BFPoly":
        n = max(self.coeffs.shape[0], other.coeffs.shape[0])
        C = np.zeros((n, n), complex)
        C[:self.coeffs.shape[0], :self.coeffs.shape[1]] += self.coeffs
        C[:other.coeffs.shape[0], :other.coeffs.shape[1]] -= other.coeffs
        return BFPoly(max(self.trunc, other.trunc), C)

    @staticmethod
    def _powers(x, n, order):
        k = np.arange(n)
        x = np.asarray(x, complex)
        base = np.empty(x.shape + (n,), complex)
        base[..., 0] = 1
        base[..., 1:] = x[..., None]
        base = np.cumprod(base, axis=-1)
        xp = np.zeros_like(base)
        xp[..., order:] = base[..., :n - order]
        fall = np.ones(n)
        for j in range(order):
            fall = fall * (k - j)
        return xp * fall

    def jets(self, z, w) -> Jet2:
        """Value and partials up to order two at points ``(z, w)``."""
        z = np.asarray(z, complex)
        w = np.asarray(w, complex)
        n = self.coeffs.shape[0]
        Z = [self._powers(z, n, k) @ self.coeffs for k in range(3)]
        Wp = [self._powers(w, n, k) for k in range(3)]

        def q(i, j):
            return (Z[i] * Wp[j]).sum(axis=-1)

        return Jet2(q(0, 0), q(1, 0), q(0, 1), q(2, 0), q(0, 2), q(1, 1))

    def slope(self, z, w):
        """``dw/dz = -p_z / p_w`` along the zero set."""
        n = self.coeffs.shape[0]
        Z0 = self._powers(z, n, 0) @ self.coeffs
        fz = ((self._powers(z, n, 1) @ self.coeffs) * self._powers(w, n, 0)).sum(axis=-1)
        fw = (Z0 * self._powers(w, n, 1)).sum(axis=-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            return -fz / fw

    def __call__(self, z, w):
        z = np.asarray(z, complex)
        w = np.asarray(w, complex)
        n = self.coeffs.shape[0]
        return ((self._powers(z, n, 0) @ self.coeffs) * self._powers(w, n, 0)).sum(axis=-1)


@dataclass(frozen=True)
class BallRegion:
    radius: float = 1.0

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")


def f0_poly() -> BFPoly:
    """``z w - 1/4``."""
    C = np.zeros((3, 3), complex)
    C[0, 0] = -0.25
    C[1, 1] = 1.0
    return BFPoly(2, C)


def truncation_error(N: int, rho: float) -> float:
    """Sup over the radius-``rho`` ball of the relative covariance error of truncating at degree ``N``.

    ``exp(-pi|z|^2) sum_{n > N} (pi|z|^2)^n / n!`` is a Poisson tail, increasing in ``|z|``.
    """
    return float(stats.poisson.sf(N, math.pi * rho * rho))


def bf_truncation_degree(rho: float, tol: float) -> int:
    """Smallest ``N`` whose covariance truncation error on the ``rho``-ball is below ``tol``."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    N = 0
    while truncation_error(N, rho) >= tol:
        N += 1
    return N


def bf_weights(N: int) -> np.ndarray:
    i = np.arange(N + 1)
    I, J = np.meshgrid(i, i, indexing="ij")
    lg = np.vectorize(math.lgamma)
    logw = 0.5 * ((I + J) * math.log(math.pi) - lg(I + 1.0) - lg(J + 1.0))
    return np.where(I + J <= N, np.exp(logw), 0.0)


def sample_bf(N: int, stream: RngStream, rho: float = 2.0) -> BFPoly:
    """Truncated Bargmann-Fock draw of total degree ``<= N``."""
    if N < 0:
        raise ValueError("N must be >= 0")
    a = sample_cn(stream, (N + 1) ** 2).reshape(N + 1, N + 1)
    return BFPoly(N, a * bf_weights(N), truncation_error(N, rho))


@dataclass(frozen=True, eq=False)
class ZeroSamples:
    """Weighted point cloud on ``Z(p)`` inside a ball."""

    points: np.ndarray
    K: np.ndarray
    weight: np.ndarray
    n_discarded: int

    @property
    def total_area(self) -> float:
        return float(self.weight.sum())

    def __len__(self):
        return len(self.K)

    def __iter__(self):
        return iter(zip(self.points, self.K, self.weight))


def _polar_nodes(rho: float, grid_n: int, n_theta: int):
    dt = rho * rho / grid_n
    t = (np.arange(grid_n) + 0.5) * dt
    th = (np.arange(n_theta) + 0.5) * 2 * math.pi / n_theta
    # snake ordering keeps consecutive nodes close for warm-started root solves
    T = np.repeat(t, n_theta)
    TH = np.concatenate([th if i % 2 == 0 else th[::-1] for i in range(grid_n)])
    return T, TH, dt, math.pi * rho * rho / (grid_n * n_theta)


def _w_polys(p: BFPoly, z: np.ndarray, deg: int) -> np.ndarray:
    return BFPoly._powers(z, p.coeffs.shape[0], 0) @ p.coeffs[:, :deg + 1]


def _residual_ok(p: BFPoly, z, w, tol: float = 1e-9):
    scale = BFPoly(p.trunc, np.abs(p.coeffs))(np.abs(z), np.abs(w)).real
    return np.abs(p(z, w)) <= tol * scale


def _track(p: BFPoly, deg: int, e, t0, w0, t1, roots, steps: int = 2):
    """Continue the branch through ``(sqrt(t0) e, w0)`` along the ray to ``t1``.

    Points where continuation does not land on the curve are re-solved for
    all roots (warm-started from ``roots``, the roots at ``t0``) and the one
    nearest the first-order prediction is taken.
    """
    z = np.sqrt(t0) * e
    w = w0.copy()
    for k in range(1, steps + 1):
        zn = np.sqrt(t0 + (t1 - t0) * k / steps) * e
        w = w + p.slope(z, w) * (zn - z)
        w = np.where(np.isfinite(w), w, w0)
        w = _core.newton_polish(_w_polys(p, zn, deg), w[:, None], 3 if k < steps else 8)[:, 0]
        z = zn
    bad = ~_residual_ok(p, z, w)
    if bad.any():
        z1 = z[bad]
        guess = w0[bad] + p.slope(np.sqrt(t0[bad]) * e[bad], w0[bad]) * (z1 - np.sqrt(t0[bad]) * e[bad])
        A = _w_polys(p, z1, deg)
        R, _ = _core.aberth(A, roots[bad])
        R = _core.newton_polish(A, R, 2)
        pick = np.argmin(np.abs(R - guess[:, None]), axis=1)
        w[bad] = R[np.arange(len(pick)), pick]
    return w


def _crossing(p, deg, e, tc, wc, roots, a, b, ga, gb, rho, iters: int = 30):
    """Root of ``t + |w(t)|^2 - rho^2`` in the bracket ``[a, b]`` (Illinois regula falsi)."""
    a, b, ga, gb = a.copy(), b.copy(), ga.copy(), gb.copy()
    side = np.zeros(len(a), int)
    for _ in range(iters):
        t = b - gb * (b - a) / (gb - ga)
        t = np.where(np.isfinite(t) & (t > np.minimum(a, b)) & (t < np.maximum(a, b)), t, 0.5 * (a + b))
        g = t + np.abs(_track(p, deg, e, tc, wc, t, roots, steps=1)) ** 2 - rho * rho
        same = np.sign(g) == np.sign(gb)
        # replace the endpoint with the same sign; halve the stale one (Illinois)
        a = np.where(same, a, b)
        ga = np.where(same, np.where(side == 1, ga / 2, ga), gb)
        side = np.where(same, 1, -1)
        b, gb = t, g
        if np.all((np.abs(b - a) < 1e-13) | (np.abs(g) < 1e-14)):
            break
    return b


_GL_X, _GL_W = np.polynomial.legendre.leggauss(3)


def bf_zero_samples(p: BFPoly, region: BallRegion = BallRegion(), grid_n: int = 64,
                    n_theta: int | None = None) -> ZeroSamples:
    """Area-weighted samples of ``Z(p)`` inside the ball, with flat curvature ``K = -V``.

    Nodes whose branch stays inside the ball over the whole cell keep one
    midpoint sample.  Cells that may straddle the sphere are split at their
    centre; each half is classified from the tracked branch at its ends and,
    when it crosses the sphere, the crossing is located and the inside part
    is integrated with three Gauss-Legendre nodes.

    Raises
    ------
    TooManyDiscards
        If more than 0.01% of the branch samples are vertical, singular or
        fail the residual check.
    """
    rho = region.radius
    n_theta = 2 * grid_n if n_theta is None else n_theta
    deg = p.w_degree
    if deg < 1:
        return ZeroSamples(np.zeros((0, 2), complex), np.zeros(0), np.zeros(0), 0)
    T, TH, dt, cell = _polar_nodes(rho, grid_n, n_theta)
    z = np.sqrt(T) * np.exp(1j * TH)
    A = _w_polys(p, z, deg)
    W, _ = _core.aberth_chain(A)
    W = _core.newton_polish(A, W, 2)
    ww = W.reshape(-1)
    tt = np.repeat(T, deg)
    e = np.exp(1j * np.repeat(TH, deg))
    finite = np.isfinite(ww)
    g = tt + np.abs(np.where(finite, ww, np.inf)) ** 2 - rho * rho
    cand = finite & (g < rho * rho)
    rows = np.repeat(W, deg, axis=0)[cand]
    ww, tt, e, g = ww[cand], tt[cand], e[cand], g[cand]
    dw = p.slope(np.sqrt(tt) * e, ww)
    dg = 1 + np.real(np.conj(ww) * dw * e / np.sqrt(tt))
    near = ~(np.abs(g) > np.abs(dg) * dt) | ~np.isfinite(dg)
    interior = (g < 0) & ~near

    pts_t = [tt[interior]]
    pts_w = [ww[interior]]
    pts_e = [e[interior]]
    pts_f = [np.ones(interior.sum())]
    idx = np.flatnonzero(near)
    if len(idx):
        tc, wc, ec, gc, rc = tt[idx], ww[idx], e[idx], g[idx], rows[idx]
        for sgn in (-1.0, 1.0):
            tend = np.maximum(tc + sgn * dt / 2, 1e-300)
            wend = _track(p, deg, ec, tc, wc, tend, rc)
            gend = tend + np.abs(wend) ** 2 - rho * rho
            gend = np.where(np.isfinite(gend), gend, np.inf)
            a = np.where(gc <= 0, tc, tend)
            b = np.where(gc <= 0, tend, tc)
            full = (gc <= 0) & (gend <= 0)
            cross = (gc <= 0) != (gend <= 0)
            if cross.any():
                tx = _crossing(p, deg, ec[cross], tc[cross], wc[cross], rc[cross], tc[cross], tend[cross],
                               gc[cross], gend[cross], rho)
                # inside part runs from the inside end to the crossing
                b[cross] = tx
                a[cross] = np.where(gc[cross] <= 0, tc[cross], tend[cross])
            use = full | cross
            lo, hi = np.minimum(a[use], b[use]), np.maximum(a[use], b[use])
            for x, wgl in zip(_GL_X, _GL_W):
                tk = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x
                pts_t.append(tk)
                pts_w.append(_track(p, deg, ec[use], tc[use], wc[use], tk, rc[use]))
                pts_e.append(ec[use])
                pts_f.append(0.5 * wgl * (hi - lo) / dt)
    tt = np.concatenate(pts_t)
    ww = np.concatenate(pts_w)
    zz = np.sqrt(tt) * np.concatenate(pts_e)
    frac = np.concatenate(pts_f)
    jet = p.jets(zz, ww)
    bad = ~_residual_ok(p, zz, ww)
    bad |= np.abs(jet.fw) <= BRANCH_EPS * np.abs(p.coeffs).max()
    V, singular = vitter_parts(jet)
    bad |= singular
    n_disc = int(bad.sum())
    if n_disc > MAX_DISCARD_FRACTION * len(tt):
        raise TooManyDiscards(f"{n_disc} of {len(tt)} branch samples are vertical, singular or off the curve")
    # nodes of half-cells where the branch leaves and re-enters the ball carry no weight
    keep = ~bad & (tt + np.abs(ww) ** 2 <= rho * rho)
    with np.errstate(divide="ignore", invalid="ignore"):
        dw = -jet.fz / jet.fw
    weight = (1 + np.abs(dw) ** 2) * cell * frac
    pts = np.stack([zz, ww], axis=1)
    return ZeroSamples(pts[keep], -V[keep], weight[keep], n_disc)


def bf_area_band(p: BFPoly, region: BallRegion, band: CurvatureBand, grid_n: int = 64,
                 n_theta: int | None = None) -> tuple[float, float]:
    """``(area of Z(p) in the ball with K in band, total area in the ball)``."""
    zs = bf_zero_samples(p, region, grid_n, n_theta)
    return float(zs.weight[band.contains(zs.K)].sum()), zs.total_area


def wilson_interval(k: int, n: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    ph = k / n
    den = 1 + z * z / n
    c = (ph + z * z / (2 * n)) / den
    h = z * math.sqrt(ph * (1 - ph) / n + z * z / (4 * n * n)) / den
    return max(0.0, c - h), min(1.0, c + h)


def prop1_event_probability(n: int, band: CurvatureBand = CurvatureBand(-4.0, -0.125), threshold: float = 0.5,
                            region: BallRegion = BallRegion(1.0), tol: float = 1e-6, stream: RngStream | None = None,
                            grid_n: int = 16, threads: int = 1) -> Estimate:
    """Frequency of ``area(Z(f) in ball, K in band) > threshold`` over ``n`` truncated BF draws.

    The truncation degree is chosen for the radius-2 ball.
    """
    if stream is None:
        raise ValueError("a stream is required")
    N = bf_truncation_degree(2.0, tol)

    def one(i):
        f = sample_bf(N, stream.derive("bf", i))
        area, _ = bf_area_band(f, region, band, grid_n)
        return area > threshold

    hits = np.array(map_ordered(one, [(i,) for i in range(n)], threads), dtype=float)
    p = float(hits.mean())
    return Estimate(p, math.sqrt(p * (1 - p) / n), n, stream.root_seed)


def _ball_grid(radius: float, grid_n: int):
    x = np.linspace(-radius, radius, grid_n)
    G = np.stack(np.meshgrid(x, x, x, x, indexing="ij"), axis=-1).reshape(-1, 4)
    G = G[(G**2).sum(axis=1) <= radius * radius + 1e-12]
    return G[:, 0] + 1j * G[:, 1], G[:, 2] + 1j * G[:, 3]


def c2_distance_to(p: BFPoly, q: BFPoly, radius: float = 2.0, grid_n: int = 9) -> float:
    """Grid lower bound for the C^2 distance between two polynomials on the ball.

    Maximum over grid points of the largest modulus among the value and the
    first and second partials of ``p - q``.
    """
    z, w = _ball_grid(radius, grid_n)
    jet = (p - q).jets(z, w)
    return float(max(np.abs(v).max() for v in jet.astuple()))
