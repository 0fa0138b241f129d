"""Pointwise Gauss curvature from 2-jets and the jet-space curvature statistics.

Conventions: the Fubini-Study metric is scaled so that complex lines have
curvature 2*pi and a degree-d curve has area 2d.  In a unitary chart
centred at a curve point the curvature is ``K = 2*pi - pi*V`` where ``V`` is
the scale-free jet invariant computed by :func:`vitter_V`.  Flat ambient
space gives ``K = -V``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SingularPoint
from .projective import Jet2
from .rng import RngStream, cn_from_generator, run_chunks

TWO_PI = 2.0 * math.pi
# |grad|^2 <= EPS_GRAD |hess|^2 flags a near-singular point.  A double root is
# only resolved to ~sqrt(machine eps), which leaves |grad|^2/|hess|^2 ~ 1e-16 at
# a computed node, so the cut has to sit above that.
EPS_GRAD = 1e-12
MAX_DISCARD_FRACTION = 1e-4


@dataclass(frozen=True)
class CurvatureBand:
    """Closed curvature interval ``[lo, hi]``; either end may be infinite."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError("band needs lo < hi")

    @classmethod
    def fs(cls, r: float, R: float, d: int) -> "CurvatureBand":
        """The band ``[2*pi - R d, 2*pi - r d]``."""
        return cls(TWO_PI - R * d, TWO_PI - r * d)

    def contains(self, K):
        K = np.asarray(K)
        return (K >= self.lo) & (K <= self.hi)


@dataclass(frozen=True)
class PhiParams:
    r: float
    R: float = math.inf

    def __post_init__(self):
        if not 0 < self.r < self.R:
            raise ValueError("r must be < R (and positive)")


@dataclass(frozen=True)
class Estimate:
    """Monte Carlo scalar. ``k_max`` is the largest curvature seen, when curvatures were computed."""

    mean: float
    stderr: float
    n: int
    seed: int
    k_max: float | None = None

    def within(self, target: float, sigmas: float = 3.0) -> bool:
        return abs(self.mean - target) <= sigmas * self.stderr


def vitter_numerator(fz, fw, fzz, fww, fzw):
    return np.abs(2 * fzw * fz * fw - fzz * fw**2 - fww * fz**2) ** 2


def vitter_parts(jet: Jet2, eps: float = EPS_GRAD):
    """``(V, singular)`` arrays for a batch of jets; ``V`` is NaN where singular."""
    fz, fw, fzz, fww, fzw = (np.asarray(v) for v in (jet.fz, jet.fw, jet.fzz, jet.fww, jet.fzw))
    g = np.abs(fz) ** 2 + np.abs(fw) ** 2
    h = np.abs(fzz) ** 2 + np.abs(fww) ** 2 + np.abs(fzw) ** 2
    singular = (g <= eps * h) | (g == 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        V = vitter_numerator(fz, fw, fzz, fww, fzw) / g**3
    return np.where(singular, np.nan, V), singular


def vitter_V(jet: Jet2, eps: float = EPS_GRAD):
    """``|2 f_zw f_z f_w - f_zz f_w^2 - f_ww f_z^2|^2 / (|f_z|^2 + |f_w|^2)^3``.

    Invariant under ``jet -> lambda * jet``.  Raises :class:`SingularPoint` when
    the gradient is negligible against the second-order part.
    """
    V, singular = vitter_parts(jet, eps)
    if np.any(singular):
        raise SingularPoint("gradient vanishes at the jet base point")
    return float(V) if np.ndim(V) == 0 else V


def curvature_flat(jet: Jet2):
    """Curvature of a holomorphic zero set in flat C^2: ``-V``."""
    return -vitter_V(jet)


def curvature_fs(jet: Jet2):
    """Fubini-Study curvature at the origin of a unitary chart: ``2*pi - pi*V``."""
    return TWO_PI - math.pi * vitter_V(jet)


def band_to_V(band: CurvatureBand, metric: str = "fs") -> tuple[float, float]:
    """Interval of ``V`` values equivalent to ``K`` in ``band``."""
    if metric == "fs":
        return (TWO_PI - band.hi) / math.pi, (TWO_PI - band.lo) / math.pi
    if metric == "flat":
        return -band.hi, -band.lo
    raise ValueError("metric must be 'fs' or 'flat'")


def _exact_jet_from_gen(gen: np.random.Generator, d: int, n: int) -> Jet2:
    a, b, al, be, ga = cn_from_generator(gen, (5, n))
    s1 = math.sqrt(d)
    s2 = math.sqrt(2 * d * (d - 1))
    s3 = math.sqrt(d * (d - 1))
    return Jet2(np.zeros(n, complex), s1 * a, s1 * b, s2 * al, s2 * be, s3 * ga)


def sample_exact_jet(d: int, stream: RngStream, n: int | None = None) -> Jet2:
    """2-jet of a Kostlan polynomial at a curve point, with exact finite-d weights.

    ``fz, fw ~ sqrt(d)``, ``fzz, fww ~ sqrt(2d(d-1))``, ``fzw ~ sqrt(d(d-1))``
    times canonical Gaussians; ``f0 = 0``.  Returns a single jet when ``n`` is
    None, otherwise a batch of ``n``.
    """
    if d < 2:
        raise ValueError("d must be >= 2")
    jet = _exact_jet_from_gen(stream.generator(), d, 1 if n is None else n)
    return jet[0] if n is None else jet


def phi_closed(params: PhiParams) -> float:
    """Closed form ``(1 + r/2pi)^-3 - (1 + R/2pi)^-3``."""
    hi = 0.0 if math.isinf(params.R) else (1 + params.R / TWO_PI) ** -3
    return (1 + params.r / TWO_PI) ** -3 - hi


def _in_range(x, lo, hi):
    return (x >= lo) & (x <= hi) if math.isfinite(hi) else (x >= lo)


def phi_mc(params: PhiParams, n: int, stream: RngStream, threads: int = 1) -> Estimate:
    """Direct Monte Carlo of ``E[(|a|^2+|b|^2)/2 * 1{pi W in [r, R]}]``.

    ``W = |2 g a b - sqrt2 al b^2 - sqrt2 be a^2|^2 / (|a|^2+|b|^2)^3`` over five
    canonical complex Gaussians.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    sq2 = math.sqrt(2.0)

    def chunk(sub: RngStream, m: int):
        a, b, al, be, ga = cn_from_generator(sub.generator(), (5, m))
        s = np.abs(a) ** 2 + np.abs(b) ** 2
        W = np.abs(2 * ga * a * b - sq2 * al * b**2 - sq2 * be * a**2) ** 2 / s**3
        x = 0.5 * s * _in_range(math.pi * W, params.r, params.R)
        return x.sum(), (x * x).sum(), m

    parts = run_chunks(stream, n, chunk, threads)
    return _mean_estimate(parts, stream)


def _mean_estimate(parts, stream, k_max=None) -> Estimate:
    S = S2 = 0.0
    N = 0
    for s, s2, m in parts:
        S += s
        S2 += s2
        N += m
    mean = S / N
    var = max(S2 / N - mean * mean, 0.0) * N / max(N - 1, 1)
    return Estimate(mean, math.sqrt(var / N), N, stream.root_seed, k_max)


def _ratio_estimate(parts, stream, k_max=None) -> Estimate:
    # parts: (sum x, sum y, sum x^2, sum y^2, sum xy, count); estimate E[x]/E[y]
    tot = np.zeros(6)
    for p in parts:
        tot += np.asarray(p, dtype=float)
    sx, sy, sxx, syy, sxy, N = tot
    N = int(N)
    R = sx / sy
    ybar = sy / N
    var_z = (sxx - 2 * R * sxy + R * R * syy) / N
    stderr = math.sqrt(max(var_z, 0.0) / max(N - 1, 1)) / ybar
    return Estimate(R, stderr, N, stream.root_seed, k_max)


def _jet_weighted(d: int, n: int, stream: RngStream, value_fn, threads: int):
    kmax = [-math.inf]

    def chunk(sub: RngStream, m: int):
        jet = _exact_jet_from_gen(sub.generator(), d, m)
        V, singular = vitter_parts(jet)
        keep = ~singular
        w = (np.abs(jet.fz) ** 2 + np.abs(jet.fw) ** 2)[keep]
        K = TWO_PI - math.pi * V[keep]
        x = w * value_fn(K, V[keep])
        y = w
        return (x.sum(), y.sum(), (x * x).sum(), (y * y).sum(), (x * y).sum(), keep.sum(), K.max(initial=-math.inf))

    parts = run_chunks(stream, n, chunk, threads)
    k_max = max(p[6] for p in parts)
    return _ratio_estimate([p[:6] for p in parts], stream, k_max)


def expected_kappa_jet(d: int, band: CurvatureBand, n: int, stream: RngStream, threads: int = 1) -> Estimate:
    """Kac-Rice estimate of ``E[kappa(Z, band)]``: gradient-weighted frequency of ``K in band``."""
    if d < 2:
        raise ValueError("d must be >= 2")
    return _jet_weighted(d, n, stream, lambda K, V: band.contains(K).astype(float), threads)


def jet_mean_V(d: int, n: int, stream: RngStream, threads: int = 1) -> Estimate:
    """Area-biased mean ``E[w V] / E[w]`` with ``w = |f_z|^2 + |f_w|^2``; equals ``d - 1``."""
    if d < 2:
        raise ValueError("d must be >= 2")
    return _jet_weighted(d, n, stream, lambda K, V: V, threads)
