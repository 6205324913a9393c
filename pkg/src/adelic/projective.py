"""Fubini-Study determinant norms on P^d and the simplex integrals behind their limit.

With the quotient metric induced by the orthonormal coordinate basis, the
degree-n monomials are orthogonal at every place.  At the arch place
``||e^a|| = (a_0! ... a_d! / n!)^{1/2}``; at the other places they have norm 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .curve import ARCH, AdelicCurve
from .logscalar import LogScalar, as_fraction, log_factorial, log_factorial_float, lsum
from .norms import monomial_count, monomials
from .sequences import VolumeReport, parallel_map

__all__ = [
    "EXACT_LIMIT",
    "HsSequencePoint",
    "simplex_volume",
    "simplex_facet_volume",
    "harmonic_double_sum",
    "entropy_integral",
    "coordinate_entropy_integral",
    "entropy_integral_mc",
    "hs_constant",
    "fs_det_log",
    "fs_det_log_direct",
    "hs_sequence",
    "hs_limit",
    "chi_volume_fubini_study",
]

EXACT_LIMIT = 60


def simplex_volume(d: int, x=1) -> Fraction:
    """Lebesgue volume of ``{t in R^{d+1}_{>=0} : sum t <= x}``, namely ``x^{d+1}/(d+1)!``."""
    x = as_fraction(x)
    if d < 0 or x <= 0:
        raise ValueError("need d >= 0 and x > 0")
    return x ** (d + 1) / math.factorial(d + 1)


def simplex_facet_volume(d: int, x=1) -> tuple[Fraction, int]:
    """``(c, k)`` with ``c sqrt(k)`` the d-volume of ``{t >= 0 : sum t = x}`` in R^{d+1}."""
    x = as_fraction(x)
    if d < 0 or x <= 0:
        raise ValueError("need d >= 0 and x > 0")
    return x**d / math.factorial(d), d + 1


def harmonic_double_sum(d: int) -> Fraction:
    """``sum_{m=1}^d sum_{l=1}^m 1/l``."""
    return sum((Fraction(1, l) for m in range(1, d + 1) for l in range(1, m + 1)), Fraction(0))


def entropy_integral(d: int) -> Fraction:
    """Average of ``t_0 ln t_0 + ... + t_d ln t_d`` over the uniform simplex."""
    if d < 0:
        raise ValueError("d must be >= 0")
    return -harmonic_double_sum(d) / (d + 1)


def coordinate_entropy_integral(d: int) -> Fraction:
    """Average of ``t_0 ln t_0`` alone, by inclusion-exclusion over the marginal density.

    ``t_0`` has density ``d (1-t)^{d-1}``; expanding ``(1-t)^{d-1}`` and using
    ``int_0^1 t^k ln t dt = -1/(k+1)^2`` gives an independent exact route.
    """
    if d < 1:
        return Fraction(0)
    total = Fraction(0)
    for i in range(d):
        total += Fraction((-1) ** i * math.comb(d - 1, i), (i + 2) ** 2)
    return -d * total


def entropy_integral_mc(d: int, samples: int, seed: int) -> tuple[float, float]:
    """Monte-Carlo mean of ``sum t_i ln t_i`` with its standard error.

    Uniform simplex points are normalized vectors of ``d + 1`` iid exponentials.
    """
    if d < 0:
        raise ValueError("d must be >= 0")
    if samples < 10_000:
        raise ValueError("at least 10^4 samples are required")
    rng = np.random.default_rng(seed)
    e = rng.exponential(size=(samples, d + 1))
    t = e / e.sum(axis=1, keepdims=True)
    vals = np.where(t > 0, t * np.log(np.where(t > 0, t, 1.0)), 0.0).sum(axis=1)
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(samples))


def hs_constant(d: int) -> Fraction:
    if d < 1:
        raise ValueError("d must be >= 1")
    return harmonic_double_sum(d) / (2 * (d + 1))


def _multiplicity(n: int, d: int, k: int) -> int:
    """Number of degree-n monomials in d+1 variables whose first exponent is k."""
    return math.comb(n - k + d - 1, d - 1)


def fs_det_log(d: int, n: int, place: str = ARCH, exact: bool | None = None):
    """``ln ||eta_n||_det`` for the monomial basis of degree n.

    Arch: ``(1/2) sum_{|a|=n} ln(a_0! ... a_d! / n!)``; every other place: 0.
    The sum is collapsed by exponent multiplicity.  Exact mode (LogScalar) is
    the default for ``n <= 60``; beyond that compensated log-gamma floats.
    """
    if d < 1 or n < 0:
        raise ValueError("need d >= 1 and n >= 0")
    if place != ARCH:
        return LogScalar.zero()
    if exact is None:
        exact = n <= EXACT_LIMIT
    r = monomial_count(d + 1, n)
    if exact:
        part = lsum(log_factorial(k) * _multiplicity(n, d, k) for k in range(n + 1))
        return (part * (d + 1) - log_factorial(n) * r) / 2
    part = math.fsum(_multiplicity(n, d, k) * log_factorial_float(k) for k in range(n + 1))
    return 0.5 * ((d + 1) * part - r * log_factorial_float(n))


def fs_det_log_direct(d: int, n: int) -> LogScalar:
    """Same arch value by enumerating every monomial (small n only)."""
    ln_n = log_factorial(n)
    return lsum(lsum(log_factorial(k) for k in a) - ln_n for a in monomials(d + 1, n)) / 2


@dataclass(frozen=True)
class HsSequencePoint:
    n: int
    r_n: int
    v_n: float
    det_log: LogScalar | float
    exact: bool


def _point(d: int, n: int, exact: bool | None) -> HsSequencePoint:
    if n < 1:
        raise ValueError("n must be >= 1")
    mode = n <= EXACT_LIMIT if exact is None else exact
    det = fs_det_log(d, n, ARCH, exact=mode)
    r = monomial_count(d + 1, n)
    return HsSequencePoint(n, r, -float(det) / (n * r), det, mode)


def hs_sequence(d: int, n_list, exact: bool | None = None) -> list[HsSequencePoint]:
    """``v_n = -ln||eta_n||_det / (n r_n)`` for each n."""
    return parallel_map(lambda n: _point(d, n, exact), list(n_list))


def _doubling_plan(n_max: int, levels: int) -> list[int]:
    ns = [n_max]
    while len(ns) < levels and ns[0] % 2 == 0 and ns[0] // 2 >= 1:
        ns.insert(0, ns[0] // 2)
    return ns


def hs_limit(d: int, n_max: int, levels: int = 3, exact: bool | None = None) -> VolumeReport:
    """Richardson limit of ``v_n`` through ``n_max/2^k``, plus a coarse lead-in sequence."""
    ns = _doubling_plan(n_max, levels)
    lead = [n for n in range(1, ns[0]) if n in (1, 2, 4, 8, 16, 32) or n % max(1, ns[0] // 4) == 0]
    pts = hs_sequence(d, lead + ns, exact)
    seq = [(p.n, p.v_n) for p in pts]
    tail = seq[-len(ns):]
    rep = VolumeReport.from_doubling(tail, "richardson", exact=float(hs_constant(d)))
    rep.sequence = seq
    rep.meta = {
        "d": d,
        "r_n": {p.n: p.r_n for p in pts},
        "sign": "nonnegative" if all(p.v_n >= 0 for p in pts) else "mixed",
        "float_mode": any(not p.exact for p in pts),
    }
    return rep


def chi_volume_fubini_study(d: int, curve: AdelicCurve, n_max: int = 120, levels: int = 3) -> VolumeReport:
    """Limit of ``deg(S^n, FS) / (n^{d+1}/(d+1)!)``; closed form ``nu(arch) sum sum 1/l / 2``."""
    w = curve.arch_mass
    closed = float(w * harmonic_double_sum(d) / 2)
    ns = _doubling_plan(n_max, levels)

    def normalized(n: int) -> float:
        deg = -sum(
            float(p.mass) * float(fs_det_log(d, n, p.flavor)) for p in curve.places if p.mass
        )
        return deg * math.factorial(d + 1) / n ** (d + 1)

    vals = parallel_map(normalized, ns)
    if w == 0:
        return VolumeReport(list(zip(ns, vals)), "exact-zero", 0.0, exact=0.0)
    return VolumeReport.from_doubling(list(zip(ns, vals)), "richardson", exact=closed)
