"""Homogeneous polynomials in three complex variables.

Sampling from the Kostlan ensemble, evaluation, exact 2-jets in unitary
charts, restriction to projective lines, univariate root extraction and the
JSON file format.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _core
from .errors import ConvergenceFailure, DegenerateLine, MalformedInput
from .rng import RngStream, sample_cn

COMPANION_MAX_DEGREE = 60
DEGENERATE_TOL = 1e-12
ROOT_RESIDUAL = 1e-10


def monomial_exponents(d: int) -> np.ndarray:
    """All ``(i, j, k)`` with ``i + j + k = d``, shape ``(N_d, 3)``."""
    rows = [(i, j, d - i - j) for i in range(d, -1, -1) for j in range(d - i, -1, -1)]
    return np.array(rows, dtype=np.int_)


def kostlan_weights(exps: np.ndarray) -> np.ndarray:
    """sqrt(d! / (i! j! k!)) for each exponent row; log-factorials past d = 150."""
    d = int(exps[0].sum())
    if d <= 150:
        fd = math.factorial(d)
        return np.array([math.sqrt(fd // (math.factorial(i) * math.factorial(j) * math.factorial(k)))
                         for i, j, k in exps])
    lg = np.vectorize(math.lgamma)
    return np.exp(0.5 * (math.lgamma(d + 1) - lg(exps[:, 0] + 1) - lg(exps[:, 1] + 1) - lg(exps[:, 2] + 1)))


@dataclass(frozen=True, eq=False)
class HomPoly3:
    """Degree-``d`` homogeneous polynomial ``sum c_ijk X0^i X1^j X2^k``.

    ``exponents`` has shape ``(M, 3)`` and ``coeffs`` shape ``(M,)``; stored
    coefficients already include any ensemble weights.
    """

    degree: int
    exponents: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        d = int(self.degree)
        exps = np.asarray(self.exponents, dtype=np.int_).reshape(-1, 3)
        c = np.asarray(self.coeffs, dtype=complex).reshape(-1)
        if d < 1:
            raise MalformedInput("degree must be >= 1")
        if exps.shape[0] != c.shape[0]:
            raise MalformedInput("exponent and coefficient counts differ")
        if exps.shape[0] == 0:
            raise MalformedInput("polynomial has no terms")
        if (exps < 0).any() or (exps.sum(axis=1) != d).any():
            raise MalformedInput(f"every exponent triple must be non-negative and sum to {d}")
        if len({tuple(r) for r in exps.tolist()}) != exps.shape[0]:
            raise MalformedInput("duplicate exponent triple")
        if not np.all(np.isfinite(c)):
            raise MalformedInput("non-finite coefficient")
        object.__setattr__(self, "degree", d)
        object.__setattr__(self, "exponents", exps)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_dict(cls, degree: int, terms: dict) -> "HomPoly3":
        exps = np.array(list(terms.keys()), dtype=np.int_).reshape(-1, 3)
        return cls(degree, exps, np.array(list(terms.values()), dtype=complex))

    def as_dict(self) -> dict[tuple[int, int, int], complex]:
        return {tuple(int(v) for v in e): complex(c) for e, c in zip(self.exponents, self.coeffs)}

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def __call__(self, X):
        return evaluate(self, X)


def sample_kostlan(d: int, stream: RngStream) -> HomPoly3:
    """Kostlan polynomial: ``c_ijk = a_ijk sqrt(d!/(i!j!k!))`` with canonical Gaussian ``a``.

    The global factor of the projective Fubini-Study normalization is dropped;
    zero sets and curvatures do not see it.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    exps = monomial_exponents(d)
    return HomPoly3(d, exps, sample_cn(stream, len(exps)) * kostlan_weights(exps))


def evaluate(P: HomPoly3, X) -> complex | np.ndarray:
    """``P(X)`` for one point ``(3,)`` or a batch ``(n, 3)``."""
    X = np.asarray(X, dtype=complex)
    single = X.ndim == 1
    Xb = np.atleast_2d(X)
    d = P.degree
    pw = Xb[:, :, None] ** np.arange(d + 1)[None, None, :]
    e = P.exponents
    vals = (pw[:, 0, :][:, e[:, 0]] * pw[:, 1, :][:, e[:, 1]] * pw[:, 2, :][:, e[:, 2]]) @ P.coeffs
    return complex(vals[0]) if single else vals


def unitary_frame(x) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Unitary basis ``(u0, u1, u2)`` of C^3 with ``u0 = x``."""
    F = unitary_frames(np.asarray(x, dtype=complex)[None, :])[0]
    return F[0], F[1], F[2]


def unitary_frames(X: np.ndarray) -> np.ndarray:
    """Batch version of :func:`unitary_frame`; returns ``(n, 3, 3)`` with rows u0, u1, u2.

    Gram-Schmidt runs over the standard basis vectors ordered by decreasing
    residual norm ``1 - |x_k|^2``, ties broken by index.
    """
    X = np.atleast_2d(np.asarray(X, dtype=complex))
    n = X.shape[0]
    order = np.argsort(np.abs(X), axis=1, kind="stable")
    rows = np.arange(n)
    F = np.empty((n, 3, 3), dtype=complex)
    F[:, 0] = X
    k1, k2 = order[:, 0], order[:, 1]
    r1 = -np.conj(X[rows, k1])[:, None] * X
    r1[rows, k1] += 1
    u1 = r1 / np.linalg.norm(r1, axis=1, keepdims=True)
    r2 = -np.conj(X[rows, k2])[:, None] * X - np.conj(u1[rows, k2])[:, None] * u1
    r2[rows, k2] += 1
    u2 = r2 / np.linalg.norm(r2, axis=1, keepdims=True)
    F[:, 1] = u1
    F[:, 2] = u2
    return F


@dataclass(frozen=True)
class Jet2:
    """Value, first and second partials of a chart function at the chart origin.

    Fields may be scalars or equally shaped arrays (a batch of jets).
    """

    f0: complex | np.ndarray
    fz: complex | np.ndarray
    fw: complex | np.ndarray
    fzz: complex | np.ndarray
    fww: complex | np.ndarray
    fzw: complex | np.ndarray

    def scaled(self, lam: complex) -> "Jet2":
        return Jet2(*(lam * np.asarray(v) for v in self.astuple()))

    def astuple(self):
        return (self.f0, self.fz, self.fw, self.fzz, self.fww, self.fzw)

    def __getitem__(self, idx) -> "Jet2":
        return Jet2(*(np.asarray(v)[idx] for v in self.astuple()))


def _sym(h: np.ndarray) -> np.ndarray:
    # (n, 6) packed (00, 11, 22, 01, 02, 12) -> (n, 3, 3)
    H = np.empty(h.shape[:-1] + (3, 3), dtype=complex)
    H[..., 0, 0], H[..., 1, 1], H[..., 2, 2] = h[..., 0], h[..., 1], h[..., 2]
    H[..., 0, 1] = H[..., 1, 0] = h[..., 3]
    H[..., 0, 2] = H[..., 2, 0] = h[..., 4]
    H[..., 1, 2] = H[..., 2, 1] = h[..., 5]
    return H


def directional_jets(P: HomPoly3, frames: np.ndarray) -> Jet2:
    """2-jets of ``(z, w) -> P(u0 + z u1 + w u2)`` at 0 for a batch of frames ``(n, 3, 3)``."""
    frames = np.asarray(frames, dtype=complex)
    val, grad, hess = _core.hom_jets(P.exponents, P.coeffs, frames[:, 0])
    H = _sym(hess)
    u1, u2 = frames[:, 1], frames[:, 2]
    Hu1 = np.einsum("nab,nb->na", H, u1)
    Hu2 = np.einsum("nab,nb->na", H, u2)
    return Jet2(
        f0=val,
        fz=np.einsum("na,na->n", grad, u1),
        fw=np.einsum("na,na->n", grad, u2),
        fzz=np.einsum("na,na->n", u1, Hu1),
        fww=np.einsum("na,na->n", u2, Hu2),
        fzw=np.einsum("na,na->n", u1, Hu2),
    )


def directional_jet(P: HomPoly3, frame) -> Jet2:
    """Exact 2-jet of ``P(u0 + z u1 + w u2)`` at the origin (monomial differentiation)."""
    F = np.stack([np.asarray(u, dtype=complex) for u in frame])[None]
    j = directional_jets(P, F)
    return Jet2(*(complex(v[0]) for v in j.astuple()))


@dataclass(frozen=True)
class ProjLine:
    """Projective line spanned by orthonormal ``u`` and ``v``, parametrized as ``u + s v``."""

    u: np.ndarray
    v: np.ndarray


def restrict_to_lines(P: HomPoly3, U: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Ascending coefficients of ``s -> P(U + s V)`` for each row, shape ``(n, d+1)``.

    Evaluation at the ``d+1`` roots of unity followed by an FFT.
    """
    d = P.degree
    nodes = np.exp(2j * np.pi * np.arange(d + 1) / (d + 1))
    pts = U[:, None, :] + nodes[None, :, None] * V[:, None, :]
    vals = _core.hom_jets(P.exponents, P.coeffs, pts.reshape(-1, 3))[0].reshape(-1, d + 1)
    return np.fft.fft(vals, axis=1) / (d + 1)


def restrict_to_line(P: HomPoly3, L: ProjLine, tol: float = DEGENERATE_TOL) -> np.ndarray:
    """Coefficients of ``g(s) = P(L.u + s L.v)``, lowest degree first.

    Raises
    ------
    DegenerateLine
        If the leading coefficient ``P(L.v)`` is negligible.
    """
    g = restrict_to_lines(P, np.asarray(L.u, complex)[None], np.asarray(L.v, complex)[None])[0]
    scale = max(P.norm, np.abs(g).max())
    if abs(evaluate(P, L.v)) < tol * scale:
        raise DegenerateLine("curve passes through the line's point at infinity")
    return g


def _companion_roots(a: np.ndarray) -> np.ndarray:
    M, n1 = a.shape
    n = n1 - 1
    comp = np.zeros((M, n, n), dtype=complex)
    if n > 1:
        comp[:, np.arange(1, n), np.arange(n - 1)] = 1
    comp[:, :, n - 1] = -a[:, :n] / a[:, n:n + 1]
    return np.linalg.eigvals(comp)


def scaled_residual(a: np.ndarray, r: np.ndarray) -> np.ndarray:
    """``|g(r)| / (max|coeff| max(1,|r|)^d)`` computed without overflow."""
    a = np.atleast_2d(a)
    r = np.atleast_2d(r)
    n = a.shape[1] - 1
    inside = np.abs(r) <= 1
    z = np.where(inside, r, 1.0 / np.where(inside, 1, r))
    acc = np.zeros_like(r, dtype=complex)
    for k in range(n, -1, -1):
        coef = np.where(inside, a[:, k:k + 1], a[:, n - k:n - k + 1])
        acc = acc * z + coef
    return np.abs(acc) / np.abs(a).max(axis=1, keepdims=True)


def roots_batch(coeffs: np.ndarray, polish_iters: int = 2) -> tuple[np.ndarray, np.ndarray]:
    """All roots of each row of ascending coefficients plus a per-row success mask.

    Companion eigenvalues up to degree 60, Aberth-Ehrlich beyond; Newton
    polishing and a scaled residual check in both cases.
    """
    a = np.atleast_2d(np.asarray(coeffs, dtype=complex))
    n = a.shape[1] - 1
    if n < 1:
        raise ValueError("degree must be >= 1")
    if n <= COMPANION_MAX_DEGREE:
        r = _companion_roots(a)
        ok = np.ones(a.shape[0], dtype=bool)
    else:
        r, ok = _core.aberth(a)
    r = _core.newton_polish(a, r, polish_iters)
    res = scaled_residual(a, r)
    ok &= np.isfinite(r).all(axis=1) & (res <= ROOT_RESIDUAL).all(axis=1)
    return r, ok


def roots(g) -> np.ndarray:
    """All complex roots of ``g`` (ascending coefficients), Newton-polished.

    Raises
    ------
    ConvergenceFailure
        If some root misses ``|g(r)| <= 1e-10 max|coeff| max(1,|r|)^d``.
    """
    a = np.asarray(g, dtype=complex)
    if len(a) < 2 or a[-1] == 0:
        raise ValueError("need degree >= 1 with nonzero leading coefficient")
    r, ok = roots_batch(a[None])
    if not ok[0]:
        raise ConvergenceFailure("root polishing did not reach the residual bound")
    return r[0]


def write_poly(P: HomPoly3, path) -> None:
    doc = {
        "degree": P.degree,
        "coeffs": [{"i": int(e[0]), "j": int(e[1]), "k": int(e[2]), "re": float(c.real), "im": float(c.imag)}
                   for e, c in zip(P.exponents, P.coeffs)],
    }
    Path(path).write_text(json.dumps(doc), encoding="utf-8")


def read_poly(path) -> HomPoly3:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        d = doc["degree"]
        rows = doc["coeffs"]
        if not isinstance(d, int) or isinstance(d, bool):
            raise MalformedInput("degree must be an integer")
        exps = [(r["i"], r["j"], r["k"]) for r in rows]
        vals = [complex(float(r["re"]), float(r["im"])) for r in rows]
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        if isinstance(exc, MalformedInput):
            raise
        raise MalformedInput(f"cannot parse polynomial file: {exc}") from exc
    if any(not all(isinstance(v, int) and not isinstance(v, bool) for v in e) for e in exps):
        raise MalformedInput("exponents must be integers")
    return HomPoly3(d, np.array(exps, dtype=np.int_).reshape(-1, 3), np.array(vals, dtype=complex))
