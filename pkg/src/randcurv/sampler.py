"""Area-uniform points on projective plane curves via random complex lines.

A unitary-uniform projective line meets a smooth degree-d curve in exactly
d points; giving each intersection equal weight samples the curve's area
measure.  Every curve-level statistic (curvature-band area fractions,
histograms, total curvature) is an average over such samples.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .curvature import (MAX_DISCARD_FRACTION, TWO_PI, CurvatureBand, Estimate, PhiParams,
                        phi_closed, vitter_parts)
from .errors import TooManyDiscards
from .projective import (DEGENERATE_TOL, HomPoly3, ProjLine, directional_jets, restrict_to_lines,
                         roots_batch, sample_kostlan, unitary_frames)
from .rng import CHUNK_SIZE, RngStream, chunk_sizes, map_ordered

MEMBERSHIP_TOL = 1e-8
MAX_REDRAWS = 20


@dataclass(frozen=True)
class CurvatureSample:
    point: np.ndarray
    K: float
    line_index: int
    root_index: int
    discarded: bool


@dataclass(frozen=True, eq=False)
class CurvePointCloud:
    """Struct-of-arrays store of :class:`CurvatureSample` records."""

    points: np.ndarray
    K: np.ndarray
    line_index: np.ndarray
    root_index: np.ndarray
    discarded: np.ndarray
    n_lines: int

    def __len__(self):
        return len(self.K)

    def __getitem__(self, i) -> CurvatureSample:
        return CurvatureSample(self.points[i], float(self.K[i]), int(self.line_index[i]),
                               int(self.root_index[i]), bool(self.discarded[i]))

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    @property
    def n_discarded(self) -> int:
        return int(self.discarded.sum())

    @property
    def retained_K(self) -> np.ndarray:
        return self.K[~self.discarded]

    def check_discards(self):
        if len(self) and self.n_discarded > MAX_DISCARD_FRACTION * len(self):
            raise TooManyDiscards(f"{self.n_discarded} of {len(self)} samples near singular points")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["re_x0", "im_x0", "re_x1", "im_x1", "re_x2", "im_x2", "K", "discarded"])
            for x, k, dis in zip(self.points, self.K, self.discarded):
                w.writerow([x[0].real, x[0].imag, x[1].real, x[1].imag, x[2].real, x[2].imag,
                            repr(float(k)), int(dis)])


@dataclass(frozen=True)
class KappaEstimate:
    band: CurvatureBand
    est: Estimate
    n_discarded: int


@dataclass(frozen=True)
class HistogramRow:
    bin_lo: float
    bin_hi: float
    mass: float
    count: int


def _random_lines(gen: np.random.Generator, m: int) -> tuple[np.ndarray, np.ndarray]:
    U = np.empty((m, 3), complex)
    V = np.empty((m, 3), complex)
    todo = np.arange(m)
    while len(todo):
        g = gen.standard_normal((len(todo), 2, 3, 2)) @ np.array([1, 1j])
        u = g[:, 0]
        nu = np.linalg.norm(u, axis=1)
        v = g[:, 1] - np.einsum("na,na->n", g[:, 1], u.conj())[:, None] * u / (nu**2)[:, None]
        nv = np.linalg.norm(v, axis=1)
        good = (nu > 1e-12) & (nv > 1e-12 * nu)
        idx = todo[good]
        U[idx] = u[good] / nu[good, None]
        V[idx] = v[good] / nv[good, None]
        todo = todo[~good]
    return U, V


def sample_random_line(stream: RngStream) -> ProjLine:
    """Span of two Gaussian vectors in C^3, orthonormalized (unitary-invariant law)."""
    U, V = _random_lines(stream.generator(), 1)
    return ProjLine(U[0], V[0])


def points_on_lines(P: HomPoly3, U: np.ndarray, V: np.ndarray):
    """Intersections of ``Z(P)`` with the lines ``U + s V`` and their curvatures.

    Returns ``(X, K, singular, line_ok)`` with ``X`` of shape ``(m, d, 3)``.
    ``line_ok`` is False for degenerate lines, failed root solves and roots
    that miss the on-curve residual bound; callers redraw those lines.
    """
    d = P.degree
    m = U.shape[0]
    coeffs = restrict_to_lines(P, U, V)
    scale = np.maximum(P.norm, np.abs(coeffs).max(axis=1))
    line_ok = np.abs(coeffs[:, d]) >= DEGENERATE_TOL * scale
    safe = coeffs.copy()
    safe[~line_ok, d] = 1.0
    r, ok = roots_batch(safe)
    line_ok &= ok
    big = np.abs(r) > 1
    rr = np.where(big, 1.0 / np.where(big, r, 1), r)
    X = np.where(big[..., None], rr[..., None] * U[:, None, :] + V[:, None, :],
                 U[:, None, :] + rr[..., None] * V[:, None, :])
    X /= np.linalg.norm(X, axis=2, keepdims=True)
    flat = X.reshape(-1, 3)
    jets = directional_jets(P, unitary_frames(flat))
    Vv, singular = vitter_parts(jets)
    K = TWO_PI - math.pi * Vv
    on_curve = np.abs(jets.f0) <= MEMBERSHIP_TOL * P.norm
    line_ok &= on_curve.reshape(m, d).all(axis=1)
    return X, K.reshape(m, d), singular.reshape(m, d), line_ok


def _line_chunk(P: HomPoly3, sub: RngStream, m: int):
    gen = sub.generator()
    U, V = _random_lines(gen, m)
    X, K, sing, ok = points_on_lines(P, U, V)
    for _ in range(MAX_REDRAWS):
        bad = np.flatnonzero(~ok)
        if not len(bad):
            break
        U2, V2 = _random_lines(gen, len(bad))
        X[bad], K[bad], sing[bad], ok[bad] = points_on_lines(P, U2, V2)
    else:
        if not ok.all():
            raise TooManyDiscards("lines kept failing root extraction")
    return X, K, sing


def sample_curve_points(P: HomPoly3, n_lines: int, stream: RngStream, threads: int = 1) -> CurvePointCloud:
    """``n_lines * d`` area-uniform samples of ``Z(P)`` with Fubini-Study curvature.

    Near-singular points are kept but flagged ``discarded`` with ``K = nan``.
    """
    if n_lines < 1:
        raise ValueError("n_lines must be >= 1")
    d = P.degree
    sizes = chunk_sizes(n_lines, CHUNK_SIZE)
    parts = map_ordered(lambda j, m: _line_chunk(P, stream.derive("lines", j), m),
                        list(enumerate(sizes)), threads)
    X = np.concatenate([p[0] for p in parts]).reshape(-1, 3)
    K = np.concatenate([p[1] for p in parts]).reshape(-1)
    sing = np.concatenate([p[2] for p in parts]).reshape(-1)
    line_index = np.repeat(np.arange(n_lines), d)
    root_index = np.tile(np.arange(d), n_lines)
    return CurvePointCloud(X, K, line_index, root_index, sing, n_lines)


def _kmax(K: np.ndarray) -> float:
    K = K[np.isfinite(K)]
    return float(K.max()) if len(K) else -math.inf


def kappa_estimate(P: HomPoly3, band: CurvatureBand, n_lines: int, stream: RngStream,
                   threads: int = 1) -> KappaEstimate:
    """Fraction of the area of ``Z(P)`` whose curvature lies in ``band``."""
    cloud = sample_curve_points(P, n_lines, stream, threads)
    cloud.check_discards()
    K = cloud.retained_K
    p = float(band.contains(K).mean())
    est = Estimate(p, math.sqrt(p * (1 - p) / len(K)), len(K), stream.root_seed, _kmax(K))
    return KappaEstimate(band, est, cloud.n_discarded)


def _per_curve(d: int, n_curves: int, stream: RngStream, threads: int, fn):
    def one(c):
        P = sample_kostlan(d, stream.derive("curve", c))
        return fn(P, stream.derive("curve-lines", c))
    return map_ordered(one, [(c,) for c in range(n_curves)], threads)


def _across_curves(values, stream, k_max) -> Estimate:
    v = np.asarray(values, dtype=float)
    se = float(v.std(ddof=1) / math.sqrt(len(v))) if len(v) > 1 else math.nan
    return Estimate(float(v.mean()), se, len(v), stream.root_seed, k_max)


def expected_kappa_curves(d: int, band: CurvatureBand, n_curves: int, n_lines: int,
                          stream: RngStream, threads: int = 1) -> Estimate:
    """Mean of :func:`kappa_estimate` over independent Kostlan curves; between-curve stderr."""
    if d < 2:
        raise ValueError("d must be >= 2")
    ks = _per_curve(d, n_curves, stream, threads, lambda P, s: kappa_estimate(P, band, n_lines, s))
    return _across_curves([k.est.mean for k in ks], stream, max(k.est.k_max for k in ks))


def gauss_bonnet_target(d: int) -> float:
    return TWO_PI * (2 - (d - 1) * (d - 2))


def gauss_bonnet_check(P: HomPoly3, n_lines: int, stream: RngStream, threads: int = 1) -> tuple[Estimate, float]:
    """Crofton estimate of the total curvature ``2d * mean(K)`` against ``2*pi*chi``.

    The standard error treats lines as the independent units.
    """
    d = P.degree
    cloud = sample_curve_points(P, n_lines, stream, threads)
    cloud.check_discards()
    keep = ~cloud.discarded
    K = np.where(keep, cloud.K, 0.0).reshape(n_lines, d)
    cnt = keep.reshape(n_lines, d).sum(axis=1).astype(float)
    S = K.sum(axis=1)
    mean = S.sum() / cnt.sum()
    z = S - mean * cnt
    se = math.sqrt((z @ z) / max(n_lines - 1, 1) / n_lines) / cnt.mean()
    total = Estimate(2 * d * mean, 2 * d * se, int(cnt.sum()), stream.root_seed, _kmax(cloud.retained_K))
    return total, gauss_bonnet_target(d)


def relative_gauss_bonnet_error(total: Estimate, target: float) -> float:
    """``(total - target)/|target|``, or the absolute error when the target is 0."""
    return (total.mean - target) / abs(target) if target != 0 else total.mean - target


def _bin_index(K: np.ndarray, edges: np.ndarray) -> np.ndarray:
    # half-open [e_i, e_{i+1}) except the last bin, which is closed at 2*pi
    idx = np.searchsorted(edges, K, side="right") - 1
    return np.clip(idx, 0, len(edges) - 2)


def curvature_histogram(d: int, n_curves: int, n_lines: int, bins, stream: RngStream,
                        threads: int = 1) -> list[HistogramRow]:
    """Area-weighted curvature histogram averaged over random curves.

    ``bins`` are the edges of a partition of ``(-inf, 2*pi]``: the first edge
    must be ``-inf`` and the last ``2*pi``.
    """
    edges = np.asarray(bins, dtype=float)
    if len(edges) < 2 or edges[0] != -math.inf or not math.isclose(edges[-1], TWO_PI) or np.any(np.diff(edges) <= 0):
        raise ValueError("bins must increase from -inf to 2*pi")
    nb = len(edges) - 1

    def one(P, s):
        cloud = sample_curve_points(P, n_lines, s)
        cloud.check_discards()
        K = cloud.retained_K
        counts = np.bincount(_bin_index(K, edges), minlength=nb)
        return counts

    if d == 1:
        per = [one(sample_kostlan(1, stream.derive("curve", c)), stream.derive("curve-lines", c))
               for c in range(n_curves)]
    else:
        per = _per_curve(d, n_curves, stream, threads, one)
    counts = np.sum(per, axis=0)
    mass = np.mean([c / c.sum() for c in per], axis=0)
    return [HistogramRow(float(edges[i]), float(edges[i + 1]), float(mass[i]), int(counts[i])) for i in range(nb)]


def write_histogram_csv(rows: list[HistogramRow], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["bin_lo", "bin_hi", "mass", "count"])
        for r in rows:
            w.writerow([r.bin_lo, r.bin_hi, repr(r.mass), r.count])


def tail_bound_check(d: int, r: float, R: float, n_curves: int, n_lines: int, eta: float,
                     stream: RngStream, threads: int = 1) -> tuple[Estimate, float]:
    """Empirical ``P[kappa(Z, [2pi - Rd, 2pi - rd]) > eta]`` and the Markov bound ``phi/eta``."""
    phi = phi_closed(PhiParams(r, R))
    if not phi < eta < 1:
        raise ValueError(f"eta must lie in ({phi:.4f}, 1)")
    band = CurvatureBand.fs(r, R, d)
    ks = _per_curve(d, n_curves, stream, threads, lambda P, s: kappa_estimate(P, band, n_lines, s))
    hits = np.array([k.est.mean > eta for k in ks], dtype=float)
    p = float(hits.mean())
    est = Estimate(p, math.sqrt(p * (1 - p) / n_curves), n_curves, stream.root_seed,
                   max(k.est.k_max for k in ks))
    return est, phi / eta
