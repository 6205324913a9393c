"""Metrized divisors on the Berkovich tree of a curve over a trivially valued field.

The tree has a root ``eta_0`` and one branch ``[0, inf)`` per closed point.
A metrized divisor ``(D, g)`` has Green function ``g = ord_x(D) t + root + psi_x(t)``
on the branch of ``x``, where ``psi_x`` is piecewise linear, bounded and
vanishes at the root.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

from .logscalar import as_fraction
from .sequences import VolumeReport, parallel_map

__all__ = [
    "TreeCurve",
    "PLFunction",
    "MetrizedDivisor",
    "canonical_divisor",
    "intersection",
    "self_intersection",
    "is_semipositive",
    "toric_det_log",
    "toric_det_limit",
    "projective_line",
]


@dataclass(frozen=True)
class TreeCurve:
    points: tuple[tuple[str, int], ...]

    def __post_init__(self):
        pts = tuple((str(i), int(k)) for i, k in self.points)
        ids = [i for i, _ in pts]
        if len(set(ids)) != len(ids):
            raise ValueError("closed point ids must be unique")
        if any(k < 1 for _, k in pts):
            raise ValueError("residue degrees must be >= 1")
        object.__setattr__(self, "points", pts)

    def degree(self, pid: str) -> int:
        for i, k in self.points:
            if i == pid:
                return k
        raise KeyError(pid)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(i for i, _ in self.points)


def projective_line(extra: Sequence[tuple[str, int]] = ()) -> TreeCurve:
    """The points ``0`` and ``inf`` of degree 1, plus any extra closed points."""
    return TreeCurve((("0", 1), ("inf", 1)) + tuple(extra))


@dataclass(frozen=True)
class PLFunction:
    """Continuous PL function on ``[0, inf)`` with ``psi(0) = 0``.

    ``slopes[i]`` holds on ``[breaks[i], breaks[i+1])``; the function is
    constant after the last break.
    """

    breaks: tuple[Fraction, ...] = (Fraction(0),)
    slopes: tuple[Fraction, ...] = ()

    def __post_init__(self):
        breaks = tuple(as_fraction(b) for b in self.breaks)
        slopes = tuple(as_fraction(s) for s in self.slopes)
        if not breaks or breaks[0] != 0:
            raise ValueError("breakpoints must start at 0")
        if any(b <= a for a, b in zip(breaks, breaks[1:])):
            raise ValueError("breakpoints must increase strictly")
        if len(slopes) == len(breaks) and slopes and slopes[-1] == 0:
            slopes = slopes[:-1]
        if len(slopes) != len(breaks) - 1:
            raise ValueError("need one slope per bounded interval (the function is constant afterwards)")
        object.__setattr__(self, "breaks", breaks)
        object.__setattr__(self, "slopes", slopes)

    @classmethod
    def zero(cls) -> PLFunction:
        return cls()

    @classmethod
    def from_json(cls, data: Mapping) -> PLFunction:
        return cls(tuple(data.get("breaks", [0])), tuple(data.get("slopes", [])))

    def to_json(self) -> dict:
        return {"breaks": [str(b) for b in self.breaks], "slopes": [str(s) for s in self.slopes]}

    def slope_at(self, t) -> Fraction:
        """Right derivative at ``t``."""
        t = as_fraction(t)
        for a, b, s in zip(self.breaks, self.breaks[1:], self.slopes):
            if a <= t < b:
                return s
        return Fraction(0)

    def __call__(self, t) -> Fraction:
        t = as_fraction(t)
        v = Fraction(0)
        for a, b, s in zip(self.breaks, self.breaks[1:], self.slopes):
            if t <= a:
                break
            v += s * (min(t, b) - a)
        return v

    def is_zero(self) -> bool:
        return not any(self.slopes)

    def _refined(self, other: PLFunction) -> tuple[Fraction, ...]:
        return tuple(sorted(set(self.breaks) | set(other.breaks)))

    def combine(self, other: PLFunction, a=1, b=1) -> PLFunction:
        """``a * self + b * other``."""
        a, b = as_fraction(a), as_fraction(b)
        cuts = self._refined(other)
        slopes = [a * self.slope_at(t) + b * other.slope_at(t) for t in cuts[:-1]]
        return PLFunction(cuts, tuple(slopes)).simplified()

    def __add__(self, other):
        return self.combine(other)

    def scale(self, c) -> PLFunction:
        return self.combine(PLFunction.zero(), c, 0)

    def simplified(self) -> PLFunction:
        """Merge adjacent intervals with equal slope and drop trailing zero slopes."""
        breaks, slopes = [self.breaks[0]], []
        for b, s in zip(self.breaks[1:], self.slopes):
            if slopes and slopes[-1] == s:
                breaks[-1] = b
            else:
                breaks.append(b)
                slopes.append(s)
        while slopes and slopes[-1] == 0:
            slopes.pop()
            breaks.pop()
        return PLFunction(tuple(breaks), tuple(slopes))

    def derivative_pairing(self, other: PLFunction) -> Fraction:
        """``int_0^inf psi'(t) chi'(t) dt`` exactly on the common refinement."""
        cuts = self._refined(other)
        return sum(
            (self.slope_at(a) * other.slope_at(a) * (b - a) for a, b in zip(cuts, cuts[1:])),
            Fraction(0),
        )

    def is_convex(self) -> bool:
        slopes = list(self.slopes) + [Fraction(0)]
        return all(s <= t for s, t in zip(slopes, slopes[1:]))


@dataclass(frozen=True)
class MetrizedDivisor:
    curve: TreeCurve
    ord: Mapping[str, int]
    root: Fraction = Fraction(0)
    phi: Mapping[str, PLFunction] = field(default_factory=dict)

    def __post_init__(self):
        ids = set(self.curve.ids)
        ords = {str(k): int(v) for k, v in self.ord.items() if int(v)}
        phi = {str(k): v for k, v in self.phi.items() if not v.is_zero()}
        for k in list(ords) + list(phi):
            if k not in ids:
                raise ValueError(f"{k!r} is not a closed point of the curve")
        object.__setattr__(self, "ord", ords)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "root", as_fraction(self.root))

    @property
    def degree(self) -> int:
        return sum(k * self.curve.degree(x) for x, k in self.ord.items())

    def branch_phi(self, x: str) -> PLFunction:
        return self.phi.get(x, PLFunction.zero())

    def green(self, x: str, t) -> Fraction:
        t = as_fraction(t)
        return self.ord.get(x, 0) * t + self.root + self.branch_phi(x)(t)

    def combine(self, other: MetrizedDivisor, a=1, b=1) -> MetrizedDivisor:
        if self.curve != other.curve:
            raise ValueError("divisors live on different curves")
        a, b = as_fraction(a), as_fraction(b)
        if a.denominator != 1 or b.denominator != 1:
            raise ValueError("divisor coefficients must stay integral")
        keys = set(self.ord) | set(other.ord)
        ords = {k: int(a) * self.ord.get(k, 0) + int(b) * other.ord.get(k, 0) for k in keys}
        pkeys = set(self.phi) | set(other.phi)
        phi = {k: self.branch_phi(k).combine(other.branch_phi(k), a, b) for k in pkeys}
        return MetrizedDivisor(self.curve, ords, a * self.root + b * other.root, phi)

    def __add__(self, other):
        return self.combine(other)

    def scaled(self, c: int) -> MetrizedDivisor:
        return self.combine(self, c, 0)

    def with_phi_scaled(self, c) -> MetrizedDivisor:
        """Same divisor with ``root`` and every ``psi_x`` multiplied by ``c``."""
        c = as_fraction(c)
        return MetrizedDivisor(self.curve, self.ord, c * self.root, {k: v.scale(c) for k, v in self.phi.items()})

    # -- JSON -------------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "points": [{"id": i, "degree": k} for i, k in self.curve.points],
            "ord": dict(self.ord),
            "root": str(self.root),
            "phi": {k: v.to_json() for k, v in self.phi.items()},
        }

    @classmethod
    def from_json(cls, data: Mapping) -> MetrizedDivisor:
        try:
            pts = []
            for p in data["points"]:
                if isinstance(p, str):
                    pts.append((p, 1))
                elif isinstance(p, Mapping):
                    pts.append((p["id"], p.get("degree", 1)))
                else:
                    pts.append((p[0], p[1]))
            phi = {k: PLFunction.from_json(v) for k, v in data.get("phi", {}).items()}
            return cls(TreeCurve(tuple(pts)), data.get("ord", {}), as_fraction(data.get("root", 0)), phi)
        except (KeyError, TypeError, IndexError) as exc:
            raise ValueError(f"malformed divisor JSON: {exc}") from exc

    @classmethod
    def load(cls, path) -> MetrizedDivisor:
        return cls.from_json(json.loads(Path(path).read_text()))


def canonical_divisor(curve: TreeCurve, coefficients: Mapping[str, int]) -> MetrizedDivisor:
    return MetrizedDivisor(curve, dict(coefficients))


def intersection(D0: MetrizedDivisor, D1: MetrizedDivisor) -> Fraction:
    """``g1(eta0) deg D0 + g0(eta0) deg D1 - sum_x [k(x):k] int psi0_x' psi1_x' dt``."""
    if D0.curve != D1.curve:
        raise ValueError("divisors live on different curves")
    total = D1.root * D0.degree + D0.root * D1.degree
    for x in set(D0.phi) & set(D1.phi):
        total -= D0.curve.degree(x) * D0.phi[x].derivative_pairing(D1.phi[x])
    return total


def self_intersection(D: MetrizedDivisor) -> Fraction:
    return intersection(D, D)


def is_semipositive(D: MetrizedDivisor) -> bool:
    """Convex on every branch, with nonnegative total outgoing slope at the root."""
    if not all(p.is_convex() for p in D.phi.values()):
        return False
    outgoing = sum(
        (k * (D.ord.get(x, 0) + D.branch_phi(x).slope_at(0)) for x, k in D.curve.points),
        Fraction(0),
    )
    return outgoing >= 0


def _check_toric(D: MetrizedDivisor):
    curve = D.curve
    for x in ("0", "inf"):
        if x not in curve.ids or curve.degree(x) != 1:
            raise ValueError("the model needs points '0' and 'inf' of degree 1")
    others = (set(D.ord) | set(D.phi)) - {"0", "inf"}
    if others:
        raise ValueError(f"divisor must be supported on the branches of 0 and inf, got {sorted(others)}")
    if any(v < 0 for v in D.ord.values()) or D.degree < 1:
        raise ValueError("need an effective divisor of degree >= 1")


def _branch_sup(base, slope, phi: PLFunction, n: int) -> Fraction:
    """``sup_t (base + slope t - n psi(t))``; attained at 0 or a breakpoint when bounded."""
    return max(base + slope * b - n * phi(b) for b in phi.breaks)


def toric_det_log(D: MetrizedDivisor, n: int) -> Fraction:
    """``sum_j ln ||z^j||_{n g}`` over the sections ``z^j`` of ``n D``, ``-n p <= j <= n q``.

    On the branch of 0, ``ln|z^j| = -j t``; on the branch of inf it is ``j t``;
    elsewhere it vanishes, so those branches only contribute ``-n root``.
    """
    _check_toric(D)
    p, q = D.ord.get("0", 0), D.ord.get("inf", 0)
    phi0, phiinf = D.branch_phi("0"), D.branch_phi("inf")
    rest = -n * D.root
    total = Fraction(0)
    for j in range(-n * p, n * q + 1):
        v0 = _branch_sup(rest, -(j + n * p), phi0, n)
        vinf = _branch_sup(rest, j - n * q, phiinf, n)
        total += max(v0, vinf, rest)
    return total


def toric_det_limit(D: MetrizedDivisor, n_max: int = 2000, levels: int = 3) -> VolumeReport:
    """``-ln ||s_1 ^ ... ^ s_r||_det / (n^2/2)`` at ``n_max/2^k`` with its Richardson limit."""
    _check_toric(D)
    ns = [n_max]
    while len(ns) < levels and ns[0] % 2 == 0:
        ns.insert(0, ns[0] // 2)
    vals = parallel_map(lambda n: float(-toric_det_log(D, n) / Fraction(n * n, 2)), ns)
    rep = VolumeReport.from_doubling(list(zip(ns, vals)), "richardson", exact=float(self_intersection(D)))
    rep.meta = {"semipositive": is_semipositive(D)}
    return rep
