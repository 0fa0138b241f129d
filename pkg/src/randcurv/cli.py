"""Command-line front end: ``randcurv <command> [flags]``.

Scalar results are written as one JSON record; tables (histograms, kernel
curves) can be written as CSV with ``--format csv``.  Exit codes: 0 success,
2 invalid configuration, 3 numerical abort.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from typing import Any

from . import __version__
from .bargmann_fock import (BallRegion, bf_area_band, bf_zero_samples, f0_poly, prop1_event_probability,
                            wilson_interval)
from .bergman import kernel_convergence, rate_fit
from .curvature import TWO_PI, CurvatureBand, Estimate, PhiParams, expected_kappa_jet, phi_closed, phi_mc
from .errors import MalformedInput, NumericalAbort
from .inflections import MAX_DEGREE, inflection_count
from .projective import read_poly, sample_kostlan
from .rng import RngStream
from .sampler import curvature_histogram, expected_kappa_curves, gauss_bonnet_check, tail_bound_check

COMMANDS = ("phi", "expected-kappa", "curvature-hist", "gauss-bonnet", "inflections", "tail-bound",
            "bf-event", "lemma-f0", "bergman")
EXIT_OK, EXIT_INVALID, EXIT_ABORT = 0, 2, 3


@dataclass
class ExperimentConfig:
    command: str
    params: dict[str, Any]
    seed: int = 0
    threads: int = 1
    out: str | None = None
    format: str = "json"


@dataclass
class ResultRecord:
    command: str
    params: dict[str, Any]
    mean: float
    stderr: float
    n: int
    n_discarded: int
    elapsed_ms: float
    seed: int
    artifact_version: str = __version__
    extra: dict[str, Any] = field(default_factory=dict)
    table: list[dict[str, Any]] | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, default=_jsonable)


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    if hasattr(x, "item"):
        return x.item()
    raise TypeError(f"not serializable: {type(x).__name__}")


def _count(s: str) -> int:
    """Counts accept scientific notation (``1e6``) as long as the value is integral."""
    v = float(s)
    if not v.is_integer():
        raise argparse.ArgumentTypeError(f"{s!r} is not an integer")
    return int(v)


def _real(s: str) -> float:
    if s.lower() in ("inf", "+inf", "infinity"):
        return math.inf
    return float(s)


def _int_list(s: str) -> list[int]:
    return [_count(x) for x in s.split(",") if x.strip()]


def _float_list(s: str) -> list[float]:
    return [_real(x) for x in s.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="root seed (64-bit)")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", default=None, help="output path (default stdout)")

    parser = argparse.ArgumentParser(prog="randcurv", description="Curvature statistics of random complex curves.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phi", parents=[common], help="Monte Carlo of the limit constant phi_{r,R}")
    p.add_argument("--r", type=_real, required=True)
    p.add_argument("--R", type=_real, default=math.inf)
    p.add_argument("--n", type=_count, default=10**6)

    p = sub.add_parser("expected-kappa", parents=[common], help="expected curvature-band area fraction")
    p.add_argument("--d", type=_count, required=True)
    p.add_argument("--r", type=_real, required=True)
    p.add_argument("--R", type=_real, default=math.inf)
    p.add_argument("--method", choices=("curves", "jet"), default="curves")
    p.add_argument("--curves", type=_count, default=200)
    p.add_argument("--lines", type=_count, default=500)
    p.add_argument("--n", type=_count, default=10**6, help="jet samples (method jet)")

    p = sub.add_parser("curvature-hist", parents=[common], help="area-weighted curvature histogram")
    p.add_argument("--d", type=_count, required=True)
    p.add_argument("--curves", type=_count, default=20)
    p.add_argument("--lines", type=_count, default=1000)
    p.add_argument("--edges", type=_float_list, default=None,
                   help="interior bin edges, comma separated (outer edges -inf and 2*pi are added)")

    p = sub.add_parser("gauss-bonnet", parents=[common], help="Crofton total curvature of one curve")
    p.add_argument("--d", type=_count, default=None)
    p.add_argument("--poly", default=None, help="polynomial JSON file")
    p.add_argument("--lines", type=_count, default=10**5)

    p = sub.add_parser("inflections", parents=[common], help="inflection counts of random curves")
    p.add_argument("--d", type=_count, default=None)
    p.add_argument("--poly", default=None)
    p.add_argument("--trials", type=_count, default=1)
    p.add_argument("--tol", type=float, default=1e-6)

    p = sub.add_parser("tail-bound", parents=[common], help="Markov tail bound for the band fraction")
    p.add_argument("--d", type=_count, required=True)
    p.add_argument("--r", type=_real, required=True)
    p.add_argument("--R", type=_real, default=math.inf)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--curves", type=_count, default=200)
    p.add_argument("--lines", type=_count, default=500)

    p = sub.add_parser("bf-event", parents=[common], help="Bargmann-Fock negative-curvature area event")
    p.add_argument("--n", type=_count, default=2000)
    p.add_argument("--band", type=_float_list, default=[-4.0, -0.125])
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--grid", type=_count, default=16)

    p = sub.add_parser("lemma-f0", parents=[common], help="area and curvature range of zw - 1/4 in the unit ball")
    p.add_argument("--grid", type=_count, default=128)

    p = sub.add_parser("bergman", parents=[common], help="rescaled Bergman kernel convergence rate")
    p.add_argument("--d-list", type=_int_list, default=[64, 128, 256, 512])
    p.add_argument("--pairs", type=_count, default=1000)
    p.add_argument("--k", type=int, default=0, choices=(0, 1, 2))
    return parser


def config_from_args(ns: argparse.Namespace) -> ExperimentConfig:
    params = {k: v for k, v in vars(ns).items() if k not in ("command", "seed", "threads", "out", "format")}
    return ExperimentConfig(ns.command, params, ns.seed, ns.threads, ns.out, ns.format)


def validate(config: ExperimentConfig) -> list[str]:
    """Violations of per-command parameter ranges; empty iff the config is valid."""
    out: list[str] = []
    p = config.params
    if config.command not in COMMANDS:
        return [f"unknown command {config.command!r}"]
    if config.threads is None or config.threads < 1:
        out.append("--threads must be >= 1")
    if not 0 <= config.seed < 2**64:
        out.append("--seed must be a 64-bit unsigned integer")
    if config.format not in ("json", "csv"):
        out.append("--format must be json or csv")
    for key in ("n", "curves", "lines", "trials", "pairs", "grid"):
        if key in p and p[key] is not None and p[key] < 1:
            out.append(f"--{key} must be >= 1")
    if "r" in p:
        if not p["r"] > 0:
            out.append("--r must be > 0")
        if not p["r"] < p.get("R", math.inf):
            out.append("r must be < R")
    cmd = config.command
    d = p.get("d")
    if cmd in ("expected-kappa", "tail-bound") and d is not None and d < 2:
        out.append("--d must be >= 2")
    if cmd == "curvature-hist" and d is not None and d < 1:
        out.append("--d must be >= 1")
    if cmd in ("gauss-bonnet", "inflections"):
        if (d is None) == (p.get("poly") is None):
            out.append("give exactly one of --d and --poly")
        elif d is not None and d < (2 if cmd == "inflections" else 1):
            out.append(f"--d must be >= {2 if cmd == 'inflections' else 1}")
        elif cmd == "inflections" and d is not None and d > MAX_DEGREE:
            out.append(f"--d must be <= {MAX_DEGREE}")
    if cmd == "tail-bound" and not out:
        phi = phi_closed(PhiParams(p["r"], p["R"]))
        if not phi < p["eta"] < 1:
            out.append(f"--eta must lie in (phi_(r,R) = {phi:.4f}, 1)")
    if cmd == "curvature-hist" and p.get("edges"):
        e = p["edges"]
        if any(b <= a for a, b in zip(e, e[1:])) or e[-1] >= TWO_PI:
            out.append("--edges must increase and stay below 2*pi")
    if cmd == "bf-event":
        band = p["band"]
        if len(band) != 2 or not band[0] < band[1]:
            out.append("--band must be lo,hi with lo < hi")
        if not p["tol"] > 0:
            out.append("--tol must be > 0")
        if not p["radius"] > 0:
            out.append("--radius must be > 0")
    if cmd == "bergman":
        dl = p["d_list"]
        if len(dl) < 3:
            out.append("--d-list needs at least 3 degrees")
        if any(x < 1 for x in dl) or any(b <= a for a, b in zip(dl, dl[1:])):
            out.append("--d-list must be increasing positive degrees")
    return out


def _curve(config: ExperimentConfig, stream: RngStream):
    p = config.params
    if p.get("poly"):
        return read_poly(p["poly"])
    return sample_kostlan(p["d"], stream.derive("curve"))


def run(config: ExperimentConfig) -> ResultRecord:
    """Dispatch a validated config and return its record."""
    p = config.params
    th = config.threads
    stream = RngStream(config.seed)
    t0 = time.perf_counter()
    extra: dict[str, Any] = {}
    table = None
    n_disc = 0
    cmd = config.command
    if cmd == "phi":
        params = PhiParams(p["r"], p["R"])
        est = phi_mc(params, p["n"], stream, th)
        extra["closed_form"] = phi_closed(params)
    elif cmd == "expected-kappa":
        band = CurvatureBand.fs(p["r"], p["R"], p["d"])
        if p["method"] == "jet":
            est = expected_kappa_jet(p["d"], band, p["n"], stream, th)
        else:
            est = expected_kappa_curves(p["d"], band, p["curves"], p["lines"], stream, th)
        extra["band"] = [band.lo, band.hi]
        extra["phi_limit"] = phi_closed(PhiParams(p["r"], p["R"]))
    elif cmd == "curvature-hist":
        edges = [-math.inf] + list(p.get("edges") or [-8.0, -4.0, -2.0, 0.0, 2.0, 4.0]) + [TWO_PI]
        rows = curvature_histogram(p["d"], p["curves"], p["lines"], edges, stream, th)
        table = [asdict(r) for r in rows]
        total = sum(r.count for r in rows)
        est = _scalar(sum(r.mass for r in rows), 0.0, total, config.seed)
    elif cmd == "gauss-bonnet":
        P = _curve(config, stream)
        est, target = gauss_bonnet_check(P, p["lines"], stream.derive("lines"), th)
        extra["target"] = target
        extra["degree"] = P.degree
    elif cmd == "inflections":
        counts = []
        for i in range(p["trials"]):
            P = read_poly(p["poly"]) if p.get("poly") else sample_kostlan(p["d"], stream.derive("curve", i))
            counts.append(inflection_count(P, p["tol"]))
        d = P.degree
        extra["counts"] = counts
        extra["expected"] = 3 * d * (d - 2)
        m = sum(counts) / len(counts)
        sd = math.sqrt(sum((c - m) ** 2 for c in counts) / max(len(counts) - 1, 1) / len(counts))
        est = _scalar(m, sd, len(counts), config.seed)
    elif cmd == "tail-bound":
        est, bound = tail_bound_check(p["d"], p["r"], p["R"], p["curves"], p["lines"], p["eta"], stream, th)
        extra["markov_bound"] = bound
    elif cmd == "bf-event":
        band = CurvatureBand(*p["band"])
        est = prop1_event_probability(p["n"], band, p["threshold"], BallRegion(p["radius"]), p["tol"],
                                      stream, p["grid"], th)
        k = round(est.mean * est.n)
        extra["wilson95"] = list(wilson_interval(k, est.n))
    elif cmd == "lemma-f0":
        f0 = f0_poly()
        zs = bf_zero_samples(f0, BallRegion(1.0), p["grid"])
        band = CurvatureBand(-2 - 1e-6, -0.25 + 1e-6)
        inband, total = bf_area_band(f0, BallRegion(1.0), band, p["grid"])
        n_disc = zs.n_discarded
        est = _scalar(total, 0.0, len(zs), config.seed)
        extra.update(exact_area=math.pi * math.sqrt(3), in_band_fraction=inband / total,
                     K_min=float(zs.K.min()), K_max=float(zs.K.max()))
    elif cmd == "bergman":
        comps = kernel_convergence(p["d_list"], p["pairs"], stream, p["k"])
        fit = rate_fit(comps)
        table = [{"d": c.d, "sup_err": c.sup_err, "k": c.k} for c in comps]
        extra.update(slope=fit.slope, residual=fit.residual, scale_constant=comps[0].scale_constant)
        est = _scalar(fit.slope, fit.residual, len(comps), config.seed)
    else:  # pragma: no cover - guarded by validate
        raise ValueError(cmd)
    if est.k_max is not None:
        extra["k_max"] = est.k_max
    elapsed = 1e3 * (time.perf_counter() - t0)
    return ResultRecord(cmd, dict(p), est.mean, est.stderr, est.n, n_disc, elapsed, config.seed,
                        extra=extra, table=table)


def _scalar(mean, stderr, n, seed):
    return Estimate(float(mean), float(stderr), int(n), seed)


def render(record: ResultRecord, fmt: str) -> str:
    if fmt == "json":
        return record.to_json() + "\n"
    buf = io.StringIO()
    if record.table:
        w = csv.DictWriter(buf, fieldnames=list(record.table[0]))
        w.writeheader()
        w.writerows(record.table)
    else:
        row = {k: v for k, v in asdict(record).items() if k not in ("params", "extra", "table")}
        w = csv.DictWriter(buf, fieldnames=list(row))
        w.writeheader()
        w.writerow(row)
    return buf.getvalue()


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    config = config_from_args(ns)
    problems = validate(config)
    if problems:
        for msg in problems:
            print(f"randcurv: error: {msg}", file=sys.stderr)
        return EXIT_INVALID
    try:
        record = run(config)
    except MalformedInput as exc:
        print(f"randcurv: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalAbort as exc:
        print(f"randcurv: numerical abort: {exc}", file=sys.stderr)
        return EXIT_ABORT
    text = render(record, config.format)
    if config.out:
        with open(config.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
