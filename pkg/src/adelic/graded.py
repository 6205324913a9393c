"""Normed graded linear series on the monomial model of P^d (d <= 2).

The degree-n piece has the monomial basis ``a`` with ``|a| = n`` and each
monomial carries a weight ``w(n, a) = -ln ||e^a||_n``.  Volumes are limits of
weight statistics normalized by ``n^{d+1}/(d+1)!``; each is computed from the
pieces directly and, independently, from the slice volumes ``vol(V^t)``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

from .bundles import (
    RFiltration,
    SplitAdelicBundle,
    arakelov_degree,
    line_degrees,
    symmetric_power_bundle,
)
from .logscalar import LogScalar, as_fraction, lsum
from .norms import monomial_count, monomials, symmetric_weight
from .sequences import VolumeReport, parallel_map

__all__ = [
    "GradedSeriesModel",
    "TwoRouteVolume",
    "GradedBundleSeries",
    "spectral_weight",
    "piece_filtration",
    "asymptotic_max_slope",
    "volume_at",
    "slice_volume",
    "arithmetic_volume",
    "chi_volume",
    "graded_from_bundle",
    "submultiplicativity_violations",
    "doubling_degrees",
]

MAX_D = 2
TRAPEZOID_STEP = Fraction(1, 64)


def _to_float(x) -> float:
    return float(x)


def _sign(x) -> int:
    if isinstance(x, LogScalar):
        return x.sign()
    return (x > 0) - (x < 0)


class GradedSeriesModel:
    """Weights ``w(n, a)`` on the degree-n monomials of ``d + 1`` variables.

    Build with :meth:`linear`, :meth:`tabulated` or :meth:`from_function`.
    ``f`` is the declared defect in ``w(n+m, a+b) >= w(n,a) + w(m,b) - f(n) - f(m)``.
    """

    def __init__(
        self,
        d: int,
        weight_fn: Callable[[int, tuple[int, ...]], object],
        *,
        kind: str,
        tau: Sequence | None = None,
        n_max: int | None = None,
        f: Callable[[int], float] | None = None,
    ):
        if not 0 <= d <= MAX_D:
            raise ValueError(f"ambient dimension must be in [0, {MAX_D}], got {d}")
        self.d = d
        self._w = weight_fn
        self.kind = kind
        self.tau = tuple(tau) if tau is not None else None
        self.n_max = n_max
        self.f = f or (lambda n: 0.0)

    # -- constructors -----------------------------------------------------
    @classmethod
    def linear(cls, tau: Sequence) -> GradedSeriesModel:
        """``w(n, a) = sum tau_i a_i``; rationals stay exact, LogScalars are allowed."""
        tau = tuple(t if isinstance(t, LogScalar) else as_fraction(t) for t in tau)
        if not tau:
            raise ValueError("tau must be nonempty")
        if all(isinstance(t, Fraction) for t in tau):
            fn = lambda n, a: sum((t * k for t, k in zip(tau, a)), Fraction(0))
        else:
            fn = lambda n, a: lsum(t * k for t, k in zip(tau, a) if k)
        return cls(len(tau) - 1, fn, kind="linear", tau=tau)

    @classmethod
    def from_function(cls, d: int, fn, f=None, n_max=None) -> GradedSeriesModel:
        return cls(d, fn, kind="function", n_max=n_max, f=f)

    @classmethod
    def tabulated(cls, d: int, table: dict, f=None, check_degree: int = 12) -> GradedSeriesModel:
        """Explicit weights ``{n: {a: value}}`` for every monomial of every degree ``1..n_max``.

        Raises ValueError for incomplete, unbounded or non-submultiplicative tables.
        """
        clean: dict[int, dict[tuple[int, ...], object]] = {}
        for n, row in table.items():
            n = int(n)
            clean[n] = {}
            for a, v in row.items():
                a = tuple(int(x) for x in (a.split(",") if isinstance(a, str) else a))
                if len(a) != d + 1 or sum(a) != n or min(a) < 0:
                    raise ValueError(f"monomial {a} does not have degree {n} in {d + 1} variables")
                clean[n][a] = v if isinstance(v, LogScalar) else as_fraction(v)
        if not clean:
            raise ValueError("empty weight table")
        n_max = max(clean)
        for n in range(1, n_max + 1):
            if n not in clean or len(clean[n]) != monomial_count(d + 1, n):
                raise ValueError(f"degree {n} is missing or incomplete")
        clean.setdefault(0, {(0,) * (d + 1): Fraction(0)})

        def fn(n, a):
            try:
                return clean[n][tuple(a)]
            except KeyError:
                raise ValueError(f"degree {n} is beyond the table (n_max={n_max})") from None

        model = cls(d, fn, kind="tabulated", n_max=n_max, f=f)
        _check_bounded(model)
        bad = submultiplicativity_violations(model, min(n_max, check_degree))
        if bad:
            raise ValueError(f"table is not f-submultiplicative, e.g. at {bad[0]}")
        return model

    @classmethod
    def from_json(cls, data: dict) -> GradedSeriesModel:
        try:
            d = int(data["d"])
            table = data["weights"]
            f = data.get("f")
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed graded-series JSON: {exc}") from exc
        fc = float(as_fraction(f)) if f is not None else 0.0
        return cls.tabulated(d, {n: {a: LogScalar.from_json(v) if isinstance(v, dict) else v for a, v in row.items()} for n, row in table.items()}, f=lambda n: fc)

    @classmethod
    def load(cls, path) -> GradedSeriesModel:
        return cls.from_json(json.loads(Path(path).read_text()))

    # -- evaluation -------------------------------------------------------
    def weight(self, n: int, a: Sequence[int]):
        a = tuple(a)
        if len(a) != self.d + 1 or sum(a) != n:
            raise ValueError(f"{a} is not a degree-{n} monomial in {self.d + 1} variables")
        return self._w(n, a)

    def weights(self, n: int) -> list:
        return [self._w(n, a) for a in monomials(self.d + 1, n)]

    def max_degree(self) -> int | None:
        return self.n_max


def _check_bounded(model: GradedSeriesModel):
    """Reject tables whose weights outgrow a linear bound ``C n``.

    With ``r(n) = max_a |w(n, a)| / n``, a linearly bounded table keeps
    ``r`` roughly flat; we require ``r(n_max) <= 1.5 r(n_max // 2) + 1``.
    """
    n_max = model.n_max
    if n_max < 2:
        return
    ratio = lambda n: max(abs(_to_float(w)) for w in model.weights(n)) / n
    top, half = ratio(n_max), ratio(n_max // 2)
    if top > 1.5 * half + 1:
        raise ValueError(f"weights are not linearly bounded (growth ratio {top:.3g} vs {half:.3g})")


def submultiplicativity_violations(model: GradedSeriesModel, max_degree: int, tol: float = 1e-12) -> list:
    """All ``(n, a, m, b)`` with ``w(n+m, a+b) < w(n,a) + w(m,b) - f(n) - f(m)``."""
    bad = []
    d1 = model.d + 1
    for n in range(1, max_degree):
        for m in range(n, max_degree - n + 1):
            fn, fm = model.f(n), model.f(m)
            for a in monomials(d1, n):
                wa = model.weight(n, a)
                for b in monomials(d1, m):
                    ab = tuple(x + y for x, y in zip(a, b))
                    gap = model.weight(n + m, ab) - wa - model.weight(m, b)
                    if _to_float(gap) < -(fn + fm) - tol:
                        bad.append((n, a, m, b))
    return bad


# -- spectral weights --------------------------------------------------------

def spectral_weight(series: GradedSeriesModel, n: int, a: Sequence[int], N_max: int):
    """``max_{N <= N_max} w(nN, N a) / N``, the Fekete approximation of the spectral weight.

    Degrees beyond a table's ``n_max`` are skipped.
    """
    a = tuple(a)
    if sum(a) != n:
        raise ValueError("monomial degree does not match n")
    if N_max < 1:
        raise ValueError("N_max must be >= 1")
    best = None
    for N in range(1, N_max + 1):
        if series.n_max is not None and n * N > series.n_max:
            break
        v = series.weight(n * N, tuple(N * x for x in a)) / N
        if best is None or v > best:
            best = v
    if best is None:
        raise ValueError(f"degree {n} is beyond the table")
    return best


def piece_filtration(series: GradedSeriesModel, n: int) -> RFiltration:
    if n < 1:
        raise ValueError("n must be >= 1")
    return RFiltration.from_values([w if isinstance(w, LogScalar) else LogScalar(w) for w in series.weights(n)])


def doubling_degrees(n_max: int, count: int = 5, minimum: int = 1) -> list[int]:
    """``n_max / 2^k`` for ``k < count``, ascending; stops below ``minimum``."""
    out = []
    n = n_max
    while len(out) < count and n >= minimum:
        out.append(n)
        if n % 2:
            break
        n //= 2
    return sorted(out)


# Piece statistics of monomial models have corrections polynomial in 1/n.
POLY_ORDERS = (1, 2)


def _report(fn, ns, method, orders=POLY_ORDERS, **kw) -> VolumeReport:
    values = parallel_map(fn, ns)
    pts = list(zip(ns, values))
    if len(pts) >= 2:
        return VolumeReport.from_doubling(pts, method, orders=orders, **kw)
    return VolumeReport(pts, method, pts[-1][1], **kw)


def asymptotic_max_slope(series: GradedSeriesModel, n_max: int) -> VolumeReport:
    """Estimate ``lim max_a w(n, a) / n`` from the degrees ``n_max / 2^k``."""
    top = series.n_max if series.n_max is not None else n_max
    ns = doubling_degrees(min(n_max, top))
    exact = float(max(series.tau, key=_to_float)) if series.kind == "linear" else None
    return _report(lambda n: _to_float(max(series.weights(n), key=_to_float)) / n, ns, "max-weight/n", exact=exact)


# -- slice volumes -----------------------------------------------------------

def _clip_area(poly, values, t):
    """Part of a polygon (with a linear function given at its vertices) where the function is >= t."""
    out_p, out_v = [], []
    k = len(poly)
    for i in range(k):
        p, q = poly[i], poly[(i + 1) % k]
        vp, vq = values[i], values[(i + 1) % k]
        if vp >= t:
            out_p.append(p)
            out_v.append(vp)
        if (vp >= t) != (vq >= t):
            s = (t - vp) / (vq - vp)
            out_p.append(tuple(x + s * (y - x) for x, y in zip(p, q)))
            out_v.append(t)
    return out_p, out_v


def _shoelace(poly) -> object:
    area = 0
    for (x0, y0), (x1, y1) in zip(poly, poly[1:] + poly[:1]):
        area += x0 * y1 - x1 * y0
    return abs(area) / 2


def slice_volume(tau: Sequence, t):
    """``d! vol{u in simplex : sum tau_i u_i >= t}``, i.e. the probability under the uniform measure.

    Exact for rational ``tau`` and ``t``; floats otherwise.
    """
    exact = all(isinstance(x, (int, Fraction)) for x in tau) and isinstance(t, (int, Fraction))
    tau = [as_fraction(x) if exact else float(x) for x in tau]
    t = as_fraction(t) if exact else float(t)
    d = len(tau) - 1
    one = Fraction(1) if exact else 1.0
    if d == 0:
        return one if tau[0] >= t else 0 * one
    if d == 1:
        lo, hi = min(tau), max(tau)
        if t <= lo:
            return one
        if t >= hi:
            return 0 * one
        return (hi - t) / (hi - lo)
    if d == 2:
        poly = [(0 * one, 0 * one), (one, 0 * one), (0 * one, one)]
        clipped, _ = _clip_area(poly, tau, t)
        if len(clipped) < 3:
            return 0 * one
        return _shoelace(clipped) * 2
    raise ValueError(f"slice volumes implemented for d <= {MAX_D}")


def _volume_count(series: GradedSeriesModel, n: int, t) -> float:
    count = sum(1 for w in series.weights(n) if _to_float(w) >= n * float(t) - 1e-12)
    return count * math.factorial(series.d) / n**series.d


def volume_at(series: GradedSeriesModel, t, n_max: int) -> VolumeReport:
    """``vol(V^t)`` as the limit of ``#{a : w(n,a) >= n t} d! / n^d``."""
    top = series.n_max if series.n_max is not None else n_max
    ns = doubling_degrees(min(n_max, top))
    exact = float(slice_volume(series.tau, t)) if series.kind == "linear" else None
    return _report(lambda n: _volume_count(series, n, t), ns, "lattice-count", exact=exact)


def _simpson(fn, a, b):
    return (b - a) / 6 * (fn(a) + 4 * fn((a + b) / 2) + fn(b))


def _slice_integral(tau: Sequence, lo, hi):
    """``int_lo^hi slice_volume(tau, t) dt``; Simpson is exact on each polynomial piece (degree <= 2)."""
    exact = all(isinstance(x, (int, Fraction)) for x in tau) and all(isinstance(x, (int, Fraction)) for x in (lo, hi))
    conv = as_fraction if exact else float
    lo, hi = conv(lo), conv(hi)
    if hi <= lo:
        return 0 * conv(0)
    cuts = sorted({conv(x) for x in tau if lo < conv(x) < hi} | {lo, hi})
    total = 0 * conv(0)
    for a, b in zip(cuts, cuts[1:]):
        total += _simpson(lambda t: slice_volume([conv(x) for x in tau], t), a, b)
    return total


def _trapezoid(fn, lo: float, hi: float, step: float) -> float:
    if hi <= lo:
        return 0.0
    k = max(1, math.ceil((hi - lo) / step))
    h = (hi - lo) / k
    pts = [fn(lo + i * h) for i in range(k + 1)]
    return h * (math.fsum(pts) - (pts[0] + pts[-1]) / 2)


@dataclass
class TwoRouteVolume:
    """A volume by two routes: piece statistics (``route_a``) and slice integration (``route_b``)."""

    route_a: VolumeReport
    route_b: float
    closed_form: float | None = None
    meta: dict = field(default_factory=dict)

    @property
    def value(self) -> float:
        return self.route_a.extrapolant

    def relative_gap(self) -> float:
        scale = max(abs(self.route_b), abs(self.value), 1e-300)
        return abs(self.value - self.route_b) / scale if scale > 1e-300 else 0.0

    def to_json(self) -> dict:
        out = {"route_a": self.route_a.to_json(), "route_b": self.route_b}
        if self.closed_form is not None:
            out["closed_form"] = self.closed_form
        out.update(self.meta)
        return out


def _normalizer(n: int, d: int) -> float:
    return n ** (d + 1) / math.factorial(d + 1)


def _scaled_int_weights(series, n):
    """``(den, [den * w(n, a)])`` as integers for linear models with rational slopes, else None."""
    if series.kind != "linear" or not all(isinstance(t, Fraction) for t in series.tau):
        return None
    den = math.lcm(*(t.denominator for t in series.tau))
    nums = [int(t * den) for t in series.tau]
    return den, [sum(c * k for c, k in zip(nums, a)) for a in monomials(series.d + 1, n)]


def _piece_sum(series, n, positive: bool) -> float:
    fast = _scaled_int_weights(series, n)
    if fast is not None:
        den, ints = fast
        return float(Fraction(sum(w for w in ints if w > 0 or not positive), den))
    ws = series.weights(n)
    if positive:
        ws = [w for w in ws if _sign(w) > 0]
    if not ws:
        return 0.0
    if all(isinstance(w, Fraction) for w in ws):
        return float(sum(ws, Fraction(0)))
    return float(lsum(w if isinstance(w, LogScalar) else LogScalar(w) for w in ws))


def _route_a(series, n_max, positive) -> VolumeReport:
    top = series.n_max if series.n_max is not None else n_max
    ns = doubling_degrees(min(n_max, top))
    label = "deg+/normalizer" if positive else "deg/normalizer"
    return _report(lambda n: _piece_sum(series, n, positive) / _normalizer(n, series.d), ns, label)


def _largest_degree(series, n_max):
    return min(n_max, series.n_max) if series.n_max is not None else n_max


def arithmetic_volume(series: GradedSeriesModel, n_max: int) -> TwoRouteVolume:
    """``lim deg_+ / (n^{d+1}/(d+1)!)`` and ``(d+1) int_0^inf vol(V^t) dt``."""
    if n_max < 4:
        raise ValueError("n_max must be >= 4")
    d = series.d
    route_a = _route_a(series, n_max, positive=True)
    closed = None
    if series.kind == "linear":
        top = max(series.tau, key=_to_float)
        exact_b = 0 if _sign(top) <= 0 else (d + 1) * _slice_integral(series.tau, 0, top)
        route_b = closed = float(exact_b)
        method = "exact-slice"
    else:
        n = _largest_degree(series, n_max)
        hi = max(0.0, max(_to_float(w) for w in series.weights(n)) / n)
        route_b = (d + 1) * _trapezoid(lambda t: _volume_count(series, n, t), 0.0, hi, float(TRAPEZOID_STEP))
        method = "trapezoid"
    meta = {"route_b_method": method}
    if method == "exact-slice" and isinstance(exact_b, (int, Fraction)):
        meta["route_b_exact"] = Fraction(exact_b)
    return TwoRouteVolume(route_a, route_b, closed, meta)


def chi_volume(series: GradedSeriesModel, n_max: int) -> TwoRouteVolume:
    """``lim deg / (n^{d+1}/(d+1)!)`` and ``-(d+1) int t d vol(V^t)``.

    The Stieltjes integral is evaluated as ``(d+1)(t0 + int_{t0}^inf vol(V^t) dt)``
    for any ``t0`` below every weight; the closed form for linear models is ``sum tau``.
    """
    if n_max < 4:
        raise ValueError("n_max must be >= 4")
    d = series.d
    route_a = _route_a(series, n_max, positive=False)
    closed = None
    if series.kind == "linear":
        lo = min(series.tau, key=_to_float)
        hi = max(series.tau, key=_to_float)
        lo_v = lo if isinstance(lo, Fraction) else float(lo)
        exact_b = (d + 1) * (lo_v + _slice_integral(series.tau, lo, hi))
        route_b = float(exact_b)
        closed = float(lsum(t if isinstance(t, LogScalar) else LogScalar(t) for t in series.tau))
        method = "exact-slice"
    else:
        n = _largest_degree(series, n_max)
        ws = [_to_float(w) / n for w in series.weights(n)]
        lo, hi = min(ws), max(ws)
        route_b = (d + 1) * (lo + _trapezoid(lambda t: _volume_count(series, n, t), lo, hi, float(TRAPEZOID_STEP)))
        method = "trapezoid"
    meta = {"route_b_method": method}
    if method == "exact-slice" and isinstance(exact_b, (int, Fraction)):
        meta["route_b_exact"] = Fraction(exact_b)
    return TwoRouteVolume(route_a, route_b, closed, meta)


# -- graded series of an adelic bundle ---------------------------------------

@dataclass
class GradedBundleSeries:
    model: GradedSeriesModel
    pieces: list[SplitAdelicBundle]
    chi_volume: VolumeReport
    closed_form: float


def _bundle_weight_fn(b: SplitAdelicBundle):
    places = [(p.mass, b.norms[p.id].flavor, b.norms[p.id].log_weights) for p in b.curve]

    def fn(n, a):
        return -lsum(symmetric_weight(flavor, ws, a) * mass for mass, flavor, ws in places)

    return fn


def graded_from_bundle(b: SplitAdelicBundle, n_max: int = 64) -> GradedBundleSeries:
    """The symmetric algebra of ``b`` as a graded series, with pieces ``S^n b`` for ``n <= n_max``.

    Monomial weights are the per-line degrees of ``S^n b`` (the HN-cast
    weights).  The chi-volume is extrapolated from ``deg(S^n b)`` normalized by
    ``n^{d+1}/(d+1)!`` with ``d = dim b - 1``.
    """
    if b.dim < 1:
        raise ValueError("graded series of the zero bundle")
    d = b.dim - 1
    nu_inf = float(b.curve.arch_mass)
    f = lambda n: 1.5 * nu_inf * math.log(monomial_count(b.dim, n)) if n > 0 else 0.0
    model = GradedSeriesModel(d, _bundle_weight_fn(b), kind="bundle", f=f)
    pieces = [symmetric_power_bundle(b, n) for n in range(1, n_max + 1)]
    ns = doubling_degrees(n_max, count=3)

    def normalized(n):
        deg = pieces[n - 1] if n <= len(pieces) else symmetric_power_bundle(b, n)
        return float(arakelov_degree(deg)) / _normalizer(n, d)

    # arch places bring (ln n)/n corrections, removed by two order-1 steps
    report = _report(normalized, ns, "deg(S^n)/normalizer", orders=(1, 1))
    h = sum(Fraction(1, l) for m in range(1, d + 1) for l in range(1, m + 1))
    closed = float(lsum(line_degrees(b))) + nu_inf * float(h) / 2
    return GradedBundleSeries(model, pieces, report, closed)

