"""Partitions, Schur-module dimensions and the symmetric-power slope identities.

Convention: ``L^lambda`` is indexed so that ``L^{(delta)} = Lambda^delta`` and
``L^{(1,...,1)} = S^delta``; it is the usual Schur functor of the transpose.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

import sympy

from .bundles import (
    RFiltration,
    SplitAdelicBundle,
    hn_filtration,
    max_slope,
    slope,
    symmetric_power_bundle,
)
from .logscalar import log_factorial

__all__ = [
    "Partition",
    "partitions",
    "transpose",
    "schur_dimension",
    "schur_dimension_jacobi_trudi",
    "cauchy_dimension_check",
    "slope_identity_check",
    "symmetric_slope_check",
    "SymmetricSlopeReport",
    "composition_dimension",
    "symmetric_filtration_dimensions",
]


@dataclass(frozen=True, order=True)
class Partition:
    parts: tuple[int, ...]

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts if int(p) != 0)
        if any(p < 0 for p in parts):
            raise ValueError("parts must be positive")
        if any(a < b for a, b in zip(parts, parts[1:])):
            raise ValueError("parts must be weakly decreasing")
        object.__setattr__(self, "parts", parts)

    @property
    def weight(self) -> int:
        return sum(self.parts)

    @property
    def length(self) -> int:
        return len(self.parts)

    def __iter__(self):
        return iter(self.parts)

    def __str__(self):
        return "(" + ",".join(map(str, self.parts)) + ")"


def partitions(n: int, max_part: int | None = None) -> Iterator[Partition]:
    """All partitions of ``n`` in reverse lexicographic order."""
    if max_part is None:
        max_part = n
    if n == 0:
        yield Partition(())
        return
    for first in range(min(n, max_part), 0, -1):
        for rest in partitions(n - first, first):
            yield Partition((first,) + rest.parts)


def transpose(lam: Partition) -> Partition:
    if not lam.parts:
        return lam
    return Partition(tuple(sum(1 for p in lam.parts if p >= k) for k in range(1, lam.parts[0] + 1)))


@lru_cache(maxsize=4096)
def _hook_content(parts: tuple[int, ...], r: int) -> int:
    cols = transpose(Partition(parts)).parts
    num, den = 1, 1
    for i, row in enumerate(parts):
        for j in range(row):
            num *= r + j - i
            den *= (row - j - 1) + (cols[j] - i - 1) + 1
    return num // den


def schur_dimension(lam: Partition, r: int) -> int:
    """``dim L^lambda(V)`` for ``dim V = r`` via the hook-content formula on the transpose."""
    if r < 1:
        raise ValueError("r must be >= 1")
    mu = transpose(lam)
    if any(r + j - i <= 0 for i, row in enumerate(mu.parts) for j in range(row)):
        return 0
    return _hook_content(mu.parts, r)


def schur_dimension_jacobi_trudi(lam: Partition, r: int) -> int:
    """Independent route: ``det(e_{lambda_i - i + j}(1^r))`` with ``e_k = C(r, k)``."""
    k = lam.length
    if k == 0:
        return 1
    lams = lam.parts

    def e(m):
        return math.comb(r, m) if m >= 0 else 0

    mat = sympy.Matrix(k, k, lambda i, j: e(lams[i] - i + j))
    return int(mat.det())


def cauchy_dimension_check(r1: int, r2: int, delta: int) -> tuple[bool, list[dict]]:
    """``dim S^delta(V (x) W) = sum_lambda dim L^lambda(V) dim L^lambda(W)`` with its per-lambda ledger."""
    if r1 < 1 or r2 < 1 or delta < 0:
        raise ValueError("need r1, r2 >= 1 and delta >= 0")
    ledger = []
    total = 0
    for lam in partitions(delta):
        a, b = schur_dimension(lam, r1), schur_dimension(lam, r2)
        total += a * b
        ledger.append({"partition": list(lam.parts), "dim_v": a, "dim_w": b, "product": a * b})
    lhs = math.comb(r1 * r2 + delta - 1, delta)
    return lhs == total, ledger


def slope_identity_check(r: int, delta: int) -> bool:
    """``sum_{a=0}^delta a C(r+delta-a-2, r-2) = (delta/r) C(delta+r-1, r-1)``."""
    if r < 2 or delta < 0:
        raise ValueError("need r >= 2 and delta >= 0")
    lhs = sum(a * math.comb(r + delta - a - 2, r - 2) for a in range(delta + 1))
    return Fraction(lhs) == Fraction(delta, r) * math.comb(delta + r - 1, r - 1)


@dataclass
class SymmetricSlopeReport:
    delta: int
    slope: float
    expected_slope: float
    slope_exact: bool | None
    max_slope: float
    max_slope_bound: float
    bound_ok: bool

    @property
    def ok(self) -> bool:
        return self.bound_ok and self.slope_exact is not False

    def to_json(self) -> dict:
        return {**self.__dict__, "ok": self.ok}


def symmetric_slope_check(b: SplitAdelicBundle, delta: int, tol: float = 1e-9) -> SymmetricSlopeReport:
    """Compare ``mu(S^delta b)`` to ``delta mu(b)`` and ``mu_max(S^delta b)`` to its factorial bound.

    The slope equality is only asserted (``slope_exact``) on arch-free curves.
    """
    s = symmetric_power_bundle(b, delta)
    mu, mu_s = slope(b), slope(s)
    exact = (mu_s == mu * delta) if b.curve.is_arch_free else None
    bound = float(max_slope(b)) * delta + float(b.curve.arch_mass) * float(log_factorial(delta))
    mmax = float(max_slope(s))
    return SymmetricSlopeReport(delta, float(mu_s), float(mu) * delta, exact, mmax, bound, mmax <= bound + tol)


def composition_dimension(dims: Sequence[int], delta: int) -> dict:
    """``{b : prod C(dim_i + b_i - 1, b_i)}`` over compositions ``b`` of ``delta``."""
    out = {}
    for bs in itertools.product(range(delta + 1), repeat=len(dims)):
        if sum(bs) == delta:
            out[bs] = math.prod(math.comb(m + k - 1, k) for m, k in zip(dims, bs))
    return out


def symmetric_filtration_dimensions(filt: RFiltration, delta: int) -> dict:
    """Graded dimensions of ``S^delta`` of a filtered space, keyed by exact jump value.

    Each composition ``b`` of ``delta`` over the jumps contributes
    ``prod C(m_i + b_i - 1, b_i)`` to the value ``sum b_i mu_i``.
    """
    values = [v for v, _ in filt.jumps]
    mults = [m for _, m in filt.jumps]
    out: dict = {}
    for bs, dim in composition_dimension(mults, delta).items():
        key = sum((v * k for v, k in zip(values, bs) if k), start=values[0] * 0)
        out[key] = out.get(key, 0) + dim
    return out


def hn_sym_dimensions(b: SplitAdelicBundle, delta: int) -> dict:
    """Jump multiplicities of the HN filtration of ``S^delta b``, keyed by value."""
    return {v: m for v, m in hn_filtration(symmetric_power_bundle(b, delta)).jumps}


__all__.append("hn_sym_dimensions")
