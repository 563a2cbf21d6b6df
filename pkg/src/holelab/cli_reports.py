"""Command-line front end with stable JSON/CSV report records.

One subcommand per construct: s-of-r, hole, omega, conditioned, zeros,
volume, covdet, hermite, forced-zero, plus `sweep` for cartesian parameter
grids.  Records serialize floats with 17 significant digits so that parsing
them back is bit-exact.  Exit codes: 0 success, 1 usage error, 2 numeric
failure.
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import __version__
from .coeff_models import CoefficientModel, peak_index_range, s_asymptotic, s_of_r_detail
from .covariance_det import (
    CovarianceSpec,
    logdet_circulant,
    logdet_dense,
    minor_gap_report,
    vandermonde_lower_bound,
)
from .evaluate_zeros import TruncatedSeries, count_zeros_disk
from .hermite_asymptotics import annulus_escape, forced_zero_experiment, saddle_deviation
from .hole_estimators import hole_bracket_report, omega_certificate, omega_conditioned_sample
from .sampling import Distribution, draw_coeffs, sample_seed, truncation_degree
from .volume_geometry import (
    VolumeQuery,
    log_integral_annotation,
    volume_exact,
    volume_mc,
    volume_upper_bound_log,
)
from ._parallel import resolve_workers


@dataclass
class ReportRecord:
    command: str
    params: dict
    results: dict
    seed: int
    version: str = __version__
    wall_time_ms: int = 0

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "params": self.params,
            "results": self.results,
            "seed": self.seed,
            "version": self.version,
            "wall_time_ms": self.wall_time_ms,
        }


def _format_value(x) -> str:
    if x is None:
        return "null"
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x) or math.isinf(x):
            return "null"  # JSON has no non-finite literals
        text = format(x, ".17g")
        if not any(ch in text for ch in ".eE"):
            text += ".0"  # keep floats typed as floats (and preserve -0.0)
        return text
    if isinstance(x, str):
        return json.dumps(x)
    if isinstance(x, dict):
        inner = ", ".join(f"{json.dumps(str(k))}: {_format_value(v)}" for k, v in x.items())
        return "{" + inner + "}"
    if isinstance(x, (list, tuple)):
        return "[" + ", ".join(_format_value(v) for v in x) + "]"
    raise TypeError(f"cannot serialize {type(x)!r}")


def record_to_json(record: ReportRecord) -> str:
    return _format_value(record.to_dict())


def _flatten(prefix: str, value, out: dict) -> None:
    if isinstance(value, dict):
        for k, v in value.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, out)
    elif isinstance(value, (list, tuple)):
        for i, v in enumerate(value):
            _flatten(f"{prefix}[{i}]", v, out)
    else:
        out[prefix] = value


def records_to_csv(records: list[ReportRecord]) -> str:
    flat_rows = []
    for rec in records:
        flat: dict = {}
        _flatten("", rec.to_dict(), flat)
        flat_rows.append(flat)
    header: list[str] = []
    for row in flat_rows:
        for key in row:
            if key not in header:
                header.append(key)
    lines = [",".join(header)]
    for row in flat_rows:
        cells = []
        for key in header:
            v = row.get(key)
            if isinstance(v, str):
                cells.append(json.dumps(v))
            else:
                cells.append(_format_value(v) if v is not None else "")
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def emit(records, fmt: str = "json", path: str | None = None) -> None:
    """Write records (one JSON object per line, or a flattened CSV)."""
    if isinstance(records, ReportRecord):
        records = [records]
    if fmt == "json":
        text = "\n".join(record_to_json(r) for r in records) + "\n"
    elif fmt == "csv":
        text = records_to_csv(records)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text)


# ---------------------------------------------------------------------------
# subcommand runners: argparse namespace -> results dict


def _model_from(args) -> CoefficientModel:
    if args.model == "gef":
        return CoefficientModel.gef()
    return CoefficientModel.mittag_leffler(args.alpha)


def _run_s_of_r(args) -> dict:
    model = _model_from(args)
    detail = s_of_r_detail(model, args.r)
    lo, hi = peak_index_range(model, args.r) if args.r >= 1 else (0, 0)
    return {
        "S": detail.value,
        "S_asymptotic": s_asymptotic(model, args.r),
        "index_set_size": detail.term_count,
        "last_index": detail.last_index,
        "peak_lo": lo,
        "peak_hi": hi,
    }


def _run_hole(args) -> dict:
    model = _model_from(args)
    return hole_bracket_report(model, args.r, args.samples, args.seed,
                               workers=args.threads)


def _run_omega(args) -> dict:
    cert = omega_certificate(args.r)
    return {
        "log_prob": cert.log_prob,
        "margin": cert.margin,
        "valid": cert.valid,
        "tail_cut": cert.tail_cut,
    }


def _run_conditioned(args) -> dict:
    frac = omega_conditioned_sample(CoefficientModel.gef(), args.r, args.samples,
                                    args.seed, workers=args.threads)
    cert = omega_certificate(args.r)
    return {"zero_free_fraction": frac, "cert_valid": cert.valid,
            "cert_margin": cert.margin}


def _run_zeros(args) -> dict:
    model = _model_from(args)
    degree = args.degree or truncation_degree(model, args.r, 1e-9, 1e-9)
    counts = []
    for i in range(args.samples):
        draw = draw_coeffs(Distribution.COMPLEX_GAUSSIAN, degree + 1,
                           sample_seed(args.seed, i))
        res = count_zeros_disk(TruncatedSeries(draw, model), args.r,
                               verify=args.verify)
        counts.append(res.count)
    counts = np.asarray(counts, dtype=np.float64)
    return {
        "mean_count": float(np.mean(counts)),
        "stderr": float(np.std(counts, ddof=1) / math.sqrt(len(counts))) if len(counts) > 1 else 0.0,
        "expected_intensity": args.r ** 2,
        "degree": degree,
        "verified": bool(args.verify),
    }


def _run_volume(args) -> dict:
    q = VolumeQuery(args.k, args.t, args.s)
    try:
        bound = volume_upper_bound_log(q)
    except ValueError:
        bound = None
    mc = volume_mc(q, args.mc_samples, args.seed) if args.mc_samples else None
    out = {
        "exact": volume_exact(q),
        "log_upper_bound_or_na": bound,
        "mc": mc.estimate if mc else None,
        "mc_ci_low": mc.ci_low if mc else None,
        "mc_ci_high": mc.ci_high if mc else None,
    }
    if args.annotate_r:
        out["annotation"] = log_integral_annotation(args.annotate_r, args.big_c)
    return out


def _run_covdet(args) -> dict:
    if args.kappa is not None and args.n_points is not None:
        spec = CovarianceSpec(args.r, args.kappa, args.n_points)
    else:
        spec = CovarianceSpec.default(args.r)
    out = minor_gap_report(spec)
    try:
        out["logdet_dense"] = logdet_dense(spec)
    except (ValueError, ArithmeticError) as exc:
        out["logdet_dense"] = None
        out["dense_note"] = str(exc)
    return out


def _run_hermite(args) -> dict:
    beta = complex(args.beta)
    out: dict = {"beta_re": beta.real, "beta_im": beta.imag}
    if args.n:
        out["saddle_deviation"] = saddle_deviation(beta, args.n)
        out["n"] = args.n
    if args.c1 is not None and args.c2 is not None:
        esc = annulus_escape(beta, args.c1, args.c2, args.nmax)
        out["escape_index"] = esc
    return out


def _run_forced_zero(args) -> dict:
    dist = Distribution.RADEMACHER if args.dist == "rademacher" else Distribution.STEINHAUS
    return forced_zero_experiment(dist, args.samples, args.degree, args.seed,
                                  workers=args.threads)


_RUNNERS = {
    "s-of-r": _run_s_of_r,
    "hole": _run_hole,
    "omega": _run_omega,
    "conditioned": _run_conditioned,
    "zeros": _run_zeros,
    "volume": _run_volume,
    "covdet": _run_covdet,
    "hermite": _run_hermite,
    "forced-zero": _run_forced_zero,
}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's default 2
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="holelab", description=__doc__)
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--format", choices=("json", "csv"), default="json")
    shared.add_argument("--output", default=None, help="path or '-' for stdout")
    shared.add_argument("--threads", type=int, default=None,
                        help="worker processes (default: THREADS env or machine)")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    def add(name):
        return sub.add_parser(name, parents=[shared])

    def common(p):
        p.add_argument("--seed", type=int, default=1)

    p = add("s-of-r")
    p.add_argument("--model", choices=("gef", "ml"), default="gef")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--r", type=float, required=True)
    common(p)

    p = add("hole")
    p.add_argument("--model", choices=("gef", "ml"), default="gef")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--samples", type=int, default=10_000)
    common(p)

    p = add("omega")
    p.add_argument("--r", type=float, required=True)
    common(p)

    p = add("conditioned")
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--samples", type=int, default=1000)
    common(p)

    p = add("zeros")
    p.add_argument("--model", choices=("gef", "ml"), default="gef")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--degree", type=int, default=None)
    p.add_argument("--verify", action="store_true")
    common(p)

    p = add("volume")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--mc-samples", type=int, default=0)
    p.add_argument("--annotate-r", type=float, default=None)
    p.add_argument("--big-c", type=float, default=1.0)
    common(p)

    p = add("covdet")
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--n-points", type=int, default=None)
    common(p)

    p = add("hermite")
    p.add_argument("--beta", default="1.0", help="complex literal, e.g. '1.3+0.4j'")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--c1", type=float, default=None)
    p.add_argument("--c2", type=float, default=None)
    p.add_argument("--nmax", type=int, default=100_000)
    common(p)

    p = add("forced-zero")
    p.add_argument("--dist", choices=("rademacher", "steinhaus"), required=True)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--degree", type=int, default=200)
    common(p)

    p = sub.add_parser("sweep", parents=[shared],
                       help="cartesian grid over comma-separated values")
    p.add_argument("subcommand", choices=sorted(_RUNNERS))
    p.add_argument("rest", nargs=argparse.REMAINDER)
    return parser


def _params_dict(args) -> dict:
    skip = {"command", "format", "output", "threads", "rest", "subcommand"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _execute_single(parser: _Parser, argv: list[str]) -> ReportRecord:
    args = parser.parse_args(argv)
    args.threads = resolve_workers(args.threads)
    start = time.monotonic()
    results = _RUNNERS[args.command](args)
    elapsed = int(1000 * (time.monotonic() - start))
    return ReportRecord(command=args.command, params=_params_dict(args),
                        results=results, seed=getattr(args, "seed", 0),
                        wall_time_ms=elapsed)


def _expand_sweep(subcommand: str, rest: list[str]) -> list[list[str]]:
    """--opt a,b,c pairs -> one argv per cartesian combination."""
    pairs: list[tuple[str, list[str]]] = []
    i = 0
    while i < len(rest):
        tok = rest[i]
        if not tok.startswith("--"):
            raise _UsageError(f"unexpected sweep token {tok!r}")
        if "=" in tok:
            flag, value = tok.split("=", 1)
            i += 1
        else:
            flag = tok
            if i + 1 >= len(rest):
                raise _UsageError(f"flag {tok!r} is missing a value")
            value = rest[i + 1]
            i += 2
        pairs.append((flag, value.split(",")))
    combos = itertools.product(*(vals for _, vals in pairs)) if pairs else [()]
    argvs = []
    for combo in combos:
        argv = [subcommand]
        for (flag, _), val in zip(pairs, combo):
            argv.extend([flag, val])
        argvs.append(argv)
    return argvs


def run(argv: list[str]) -> int:
    """Execute a command line; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "sweep":
            forward = [] if args.threads is None else ["--threads", str(args.threads)]
            records = [
                _execute_single(parser, sub_argv + forward)
                for sub_argv in _expand_sweep(args.subcommand, args.rest)
            ]
        else:
            records = [_execute_single(parser, argv)]
        emit(records, fmt=args.format, path=args.output)
        return 0
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (ArithmeticError, ValueError, RuntimeError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
