"""``adelic`` command-line runner.

Exit status: 0 on success, 2 on invalid input, 3 when a checked property fails.
Results go to ``--out`` (default stdout); logs go to stderr.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import random
import sys
from fractions import Fraction
from pathlib import Path

from . import bundles as B
from .curve import AdelicCurve, standard_rational_curve
from .graded import GradedSeriesModel, arithmetic_volume, chi_volume, volume_at
from .logscalar import LogScalar, log_factorial
from .partitions import cauchy_dimension_check
from .projective import (
    chi_volume_fubini_study,
    entropy_integral,
    entropy_integral_mc,
    hs_limit,
    simplex_facet_volume,
    simplex_volume,
)
from .sequences import fmt, parallel_map
from .tree import MetrizedDivisor, intersection, toric_det_limit

log = logging.getLogger("adelic")

EXIT_OK, EXIT_INVALID, EXIT_CHECK = 0, 2, 3


class CheckFailed(Exception):
    """A verified property did not hold."""


def _round(obj):
    """Round floats to 12 significant digits so JSON output is stable."""
    if isinstance(obj, float):
        return float(fmt(obj)) if math.isfinite(obj) else str(obj)
    if isinstance(obj, dict):
        return {str(k): _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, LogScalar):
        return obj.to_json()
    return obj


def _dump_json(obj) -> str:
    return json.dumps(_round(obj), indent=2, sort_keys=True) + "\n"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if v is None else fmt(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


# -- subcommands -------------------------------------------------------------

def cmd_hs_limit(o):
    rep = hs_limit(o.d, o.n_max)
    extra = {}
    if o.curve:
        curve = AdelicCurve.load(o.curve)
        chi = chi_volume_fubini_study(o.d, curve, n_max=o.n_max)
        extra = {"chi_volume": chi.extrapolant, "chi_closed_form": chi.exact}
    if o.format == "json":
        return _dump_json({**rep.to_json(), **extra})
    rows = []
    last = rep.sequence[-1][0]
    for n, v in rep.sequence:
        rows.append([n, rep.meta["r_n"][n], v, rep.extrapolant if n == last else None])
    return _csv(["n", "r_n", "v_n", "extrapolant"], rows)


def cmd_simplex(o):
    out = {
        "d": o.d,
        "exact": str(entropy_integral(o.d)),
        "volume": str(simplex_volume(o.d, Fraction(o.x))),
        "facet": {"coefficient": str(simplex_facet_volume(o.d, Fraction(o.x))[0]), "radicand": o.d + 1},
    }
    if o.samples:
        mean, se = entropy_integral_mc(o.d, o.samples, o.seed)
        out.update(mc=mean, stderr=se, samples=o.samples, seed=o.seed)
    return _dump_json(out)


def _series(o) -> GradedSeriesModel:
    if o.table:
        return GradedSeriesModel.load(o.table)
    if not o.tau:
        raise ValueError("give --tau or --table")
    return GradedSeriesModel.linear([Fraction(x) for x in o.tau.split(",")])


def cmd_volume(o):
    s = _series(o)
    chi = chi_volume(s, o.n_max)
    arith = arithmetic_volume(s, o.n_max)
    out = {"chi_volume": chi.to_json(), "arithmetic_volume": arith.to_json()}
    if o.t is not None:
        out["slice"] = volume_at(s, Fraction(o.t), o.n_max).to_json()
    if o.format == "csv":
        return chi.route_a.to_csv()
    return _dump_json(out)


def cmd_hn(o):
    b = B.SplitAdelicBundle.load(o.bundle)
    if b.dim == 0:
        raise ValueError("the bundle has dimension 0")
    filt = B.hn_filtration(b)
    out = {
        "degree": B.arakelov_degree(b),
        "degree_float": float(B.arakelov_degree(b)),
        "positive_degree": B.positive_degree(b),
        "slope": float(B.slope(b)),
        "max_slope": float(B.max_slope(b)),
        "min_slope": float(B.min_slope(b)),
        "jumps": filt.to_json(),
    }
    if o.format == "csv":
        return _csv(["value", "multiplicity"], [[float(v), m] for v, m in filt.jumps])
    return _dump_json(out)


def fuzz_one(seed: int, i: int) -> dict:
    """Property checks on one seeded bundle; returns ``{check: passed}``."""
    rng = random.Random(f"{seed}:{i}")
    curve = standard_rational_curve(7) if i % 2 == 0 else B.arch_free_curve()
    b = B.random_split_bundle(rng, curve)
    r, nu = b.dim, float(curve.arch_mass)
    filt = B.hn_filtration(b)
    gap = float(B.arakelov_degree(b)) - float(B.arakelov_degree(B.cast_bundle(b)))
    spread = float(B.arakelov_degree(b) + filt.first_moment())
    bound = 0.5 * nu * r * math.log(r) + 1e-9
    b2 = B.random_split_bundle(rng, curve)
    tmin = B.min_slope(B.tensor_bundle(b, b2))
    delta = rng.randint(1, 3)
    s = B.symmetric_power_bundle(b, delta)
    res = {
        "positive_degree_integral": B.positive_degree(b) == filt.integral_positive(),
        "cast_gap": -1e-9 <= gap <= bound,
        "degree_filtration": -1e-9 <= spread <= bound,
        "lambda_max": B.lambda_max(b) <= B.max_slope(b),
        "sym_max_slope": float(B.max_slope(s)) <= delta * float(B.max_slope(b)) + nu * float(log_factorial(delta)) + 1e-9,
    }
    if curve.is_arch_free:
        res["tensor_min_slope"] = tmin == B.min_slope(b) + B.min_slope(b2)
        res["sym_slope"] = B.slope(s) == B.slope(b) * delta
        res["sym_hn"] = B.hn_filtration(s) == filt.symmetric_power(delta)
    else:
        lower = float(B.min_slope(b)) + float(B.min_slope(b2)) - 1.5 * nu * (math.log(r) + math.log(b2.dim))
        res["tensor_min_slope"] = float(tmin) >= lower - 1e-9
    return res


def cmd_fuzz_slopes(o):
    if o.seed is None:
        raise ValueError("--seed is required")
    if o.count < 1:
        raise ValueError("--count must be >= 1")
    results = parallel_map(lambda i: fuzz_one(o.seed, i), range(o.count))
    summary: dict[str, list[int]] = {}
    for res in results:
        for k, ok in res.items():
            cnt = summary.setdefault(k, [0, 0])
            cnt[0 if ok else 1] += 1
    report = {
        "seed": o.seed,
        "count": o.count,
        "checks": {k: {"pass": p, "fail": f} for k, (p, f) in sorted(summary.items())},
        "all_pass": all(f == 0 for _, f in summary.values()),
    }
    text = _dump_json(report)
    if not report["all_pass"]:
        raise CheckFailed(text)
    return text


def cmd_tree_intersect(o):
    a = MetrizedDivisor.load(o.a)
    b = MetrizedDivisor.load(o.b) if o.b else a
    v = intersection(a, b)
    return _dump_json({"intersection": str(v), "float": float(v)})


def cmd_tree_det_limit(o):
    a = MetrizedDivisor.load(o.a)
    rep = toric_det_limit(a, o.n_max)
    if o.format == "csv":
        return rep.to_csv()
    return _dump_json(rep.to_json())


def cmd_cauchy(o):
    ok, ledger = cauchy_dimension_check(o.r1, o.r2, o.delta)
    text = _dump_json({"r1": o.r1, "r2": o.r2, "delta": o.delta, "holds": ok, "ledger": ledger})
    if not ok:
        raise CheckFailed(text)
    return text


COMMANDS = {
    "hs-limit": (cmd_hs_limit, {"d": 1, "n_max": 200, "curve": None, "format": "csv"}),
    "simplex": (cmd_simplex, {"d": 2, "x": "1", "samples": 1_000_000, "seed": 0, "format": "json"}),
    "volume": (cmd_volume, {"tau": None, "table": None, "n_max": 400, "t": None, "format": "json"}),
    "hn": (cmd_hn, {"bundle": None, "format": "json"}),
    "fuzz-slopes": (cmd_fuzz_slopes, {"seed": None, "count": 100, "format": "json"}),
    "tree-intersect": (cmd_tree_intersect, {"a": None, "b": None, "format": "json"}),
    "tree-det-limit": (cmd_tree_det_limit, {"a": None, "n_max": 2000, "format": "csv"}),
    "cauchy": (cmd_cauchy, {"r1": 2, "r2": 2, "delta": 2, "format": "json"}),
}

REQUIRED = {"hn": ["bundle"], "tree-intersect": ["a"], "tree-det-limit": ["a"]}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="adelic", description=__doc__.splitlines()[0])
    p.add_argument("--log-level", default="WARNING")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON file of option defaults (flags win)")
        sp.add_argument("--out", help="output path (default stdout)")
        sp.add_argument("--format", choices=["csv", "json"])

    sp = sub.add_parser("hs-limit", help="Fubini-Study Hilbert-Samuel sequence")
    sp.add_argument("--d", type=int)
    sp.add_argument("--n-max", type=int)
    sp.add_argument("--curve")
    common(sp)

    sp = sub.add_parser("simplex", help="simplex volume and entropy integral")
    sp.add_argument("--d", type=int)
    sp.add_argument("--x")
    sp.add_argument("--samples", type=int)
    sp.add_argument("--seed", type=int)
    common(sp)

    sp = sub.add_parser("volume", help="volumes of a graded series")
    sp.add_argument("--tau", help="comma-separated slopes of a linear model")
    sp.add_argument("--table", help="JSON weight table")
    sp.add_argument("--n-max", type=int)
    sp.add_argument("--t", help="also report vol(V^t)")
    common(sp)

    sp = sub.add_parser("hn", help="HN filtration of a split bundle")
    sp.add_argument("--bundle")
    common(sp)

    sp = sub.add_parser("fuzz-slopes", help="seeded slope/degree property suite")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--count", type=int)
    common(sp)

    sp = sub.add_parser("tree-intersect", help="intersection of metrized divisors")
    sp.add_argument("--a")
    sp.add_argument("--b")
    common(sp)

    sp = sub.add_parser("tree-det-limit", help="determinant-norm limit on the P^1 tree")
    sp.add_argument("--a")
    sp.add_argument("--n-max", type=int)
    common(sp)

    sp = sub.add_parser("cauchy", help="Cauchy decomposition dimension check")
    sp.add_argument("--r1", type=int)
    sp.add_argument("--r2", type=int)
    sp.add_argument("--delta", type=int)
    common(sp)
    return p


def resolve(args: argparse.Namespace) -> argparse.Namespace:
    """Merge flags over config-file values over built-in defaults, then validate."""
    fn, defaults = COMMANDS[args.command]
    config = {}
    if args.config:
        config = json.loads(Path(args.config).read_text())
        if not isinstance(config, dict):
            raise ValueError("config file must hold a JSON object")
        config = {k.replace("-", "_"): v for k, v in config.items()}
        unknown = set(config) - set(defaults) - {"out"}
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
    merged = {"out": None, **defaults}
    merged.update(config)
    for k, v in vars(args).items():
        if v is not None and k not in ("config", "command", "log_level"):
            merged[k] = v
    for k in REQUIRED.get(args.command, []):
        if merged.get(k) is None:
            raise ValueError(f"--{k.replace('_', '-')} is required")
    for k in ("d", "n_max", "count", "r1", "r2", "samples"):
        if k in merged and merged[k] is not None and int(merged[k]) < (0 if k in ("samples",) else 1):
            raise ValueError(f"{k} must be positive")
    if merged.get("delta") is not None and merged["delta"] < 0:
        raise ValueError("delta must be >= 0")
    return argparse.Namespace(command=args.command, fn=fn, **merged)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), stream=sys.stderr, format="%(levelname)s %(message)s")
    try:
        opts = resolve(args)
        text = opts.fn(opts)
    except CheckFailed as exc:
        sys.stderr.write("check failed\n")
        _write(getattr(opts, "out", None), str(exc))
        return EXIT_CHECK
    except (ValueError, KeyError, TypeError, OSError, json.JSONDecodeError, ZeroDivisionError) as exc:
        sys.stderr.write(f"adelic: error: {exc}\n")
        return EXIT_INVALID
    _write(opts.out, text)
    return EXIT_OK


def _write(path, text):
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
