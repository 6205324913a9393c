"""Diagonal norms: per-place norms admitting a common orthogonal basis.

A :class:`DiagonalNorm` stores ``c_i = ln ||e_i||`` for a labeled basis.  The
constructions below (dual, tensor, direct sum, symmetric power, determinant)
are closed forms valid for orthogonal bases.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from typing import Iterator, Sequence

from .curve import ARCH, Place, log_abs
from .logscalar import LogScalar, as_fraction, lmax, log_factorial, lsum

__all__ = [
    "ULTRAMETRIC",
    "HERMITIAN",
    "DiagonalNorm",
    "Monomial",
    "monomials",
    "monomial_count",
    "dual_norm",
    "tensor_norm",
    "direct_sum_norm",
    "symmetric_power_norm",
    "symmetric_weight",
    "determinant_log",
    "norm_distance",
    "vector_log_norm",
    "antisym_image_log_norm",
]

ULTRAMETRIC, HERMITIAN = "ultrametric", "hermitian"


@dataclass(frozen=True)
class DiagonalNorm:
    flavor: str
    basis_labels: tuple[str, ...]
    log_weights: tuple[LogScalar, ...]

    def __post_init__(self):
        object.__setattr__(self, "basis_labels", tuple(str(l) for l in self.basis_labels))
        object.__setattr__(
            self,
            "log_weights",
            tuple(w if isinstance(w, LogScalar) else LogScalar(w) for w in self.log_weights),
        )
        if self.flavor not in (ULTRAMETRIC, HERMITIAN):
            raise ValueError(f"unknown norm flavor {self.flavor!r}")
        if len(self.basis_labels) != len(self.log_weights):
            raise ValueError("labels and weights differ in length")
        if len(set(self.basis_labels)) != len(self.basis_labels):
            raise ValueError("basis labels must be unique")

    @classmethod
    def unit(cls, flavor: str, dim: int, labels: Sequence[str] | None = None) -> DiagonalNorm:
        labels = tuple(labels) if labels is not None else tuple(f"e{i}" for i in range(dim))
        return cls(flavor, labels, (LogScalar.zero(),) * dim)

    @property
    def dim(self) -> int:
        return len(self.log_weights)

    def is_unit(self) -> bool:
        return all(w.is_zero() for w in self.log_weights)

    def weight(self, label: str) -> LogScalar:
        return self.log_weights[self.basis_labels.index(label)]

    def restrict(self, labels: Sequence[str]) -> DiagonalNorm:
        """Norm on a coordinate subspace; for orthogonal bases this is also the coordinate quotient norm."""
        return DiagonalNorm(self.flavor, tuple(labels), tuple(self.weight(l) for l in labels))

    def to_json(self) -> dict:
        return {
            "flavor": self.flavor,
            "labels": list(self.basis_labels),
            "weights": [w.to_json() for w in self.log_weights],
        }

    @classmethod
    def from_json(cls, data: dict) -> DiagonalNorm:
        weights = tuple(LogScalar.from_json(w) for w in data["weights"])
        labels = data.get("labels") or [f"e{i}" for i in range(len(weights))]
        return cls(data["flavor"], tuple(labels), weights)


@dataclass(frozen=True, order=True)
class Monomial:
    exponents: tuple[int, ...]

    @property
    def degree(self) -> int:
        return sum(self.exponents)

    @property
    def label(self) -> str:
        return ",".join(map(str, self.exponents))

    def __mul__(self, other: Monomial) -> Monomial:
        return Monomial(tuple(a + b for a, b in zip(self.exponents, other.exponents, strict=True)))


def monomials(r: int, degree: int) -> Iterator[tuple[int, ...]]:
    """Exponent vectors of length ``r`` summing to ``degree``, lexicographically descending."""
    if r == 0:
        if degree == 0:
            yield ()
        return
    if r == 1:
        yield (degree,)
        return
    for first in range(degree, -1, -1):
        for rest in monomials(r - 1, degree - first):
            yield (first,) + rest


def monomial_count(r: int, degree: int) -> int:
    return math.comb(r + degree - 1, degree) if r > 0 else int(degree == 0)


def _same_flavor(n1: DiagonalNorm, n2: DiagonalNorm):
    if n1.flavor != n2.flavor:
        raise ValueError(f"flavor mismatch: {n1.flavor} vs {n2.flavor}")


def dual_norm(n: DiagonalNorm) -> DiagonalNorm:
    return DiagonalNorm(n.flavor, n.basis_labels, tuple(-w for w in n.log_weights))


def tensor_norm(n1: DiagonalNorm, n2: DiagonalNorm) -> DiagonalNorm:
    """epsilon-tensor (ultrametric) or orthogonal tensor (hermitian) product."""
    _same_flavor(n1, n2)
    labels, weights = [], []
    for l1, c in zip(n1.basis_labels, n1.log_weights):
        for l2, d in zip(n2.basis_labels, n2.log_weights):
            labels.append(f"{l1}*{l2}")
            weights.append(c + d)
    return DiagonalNorm(n1.flavor, tuple(labels), tuple(weights))


def direct_sum_norm(n1: DiagonalNorm, n2: DiagonalNorm) -> DiagonalNorm:
    _same_flavor(n1, n2)
    return DiagonalNorm(
        n1.flavor, n1.basis_labels + n2.basis_labels, n1.log_weights + n2.log_weights
    )


def symmetric_weight(flavor: str, weights: Sequence[LogScalar], a: Sequence[int]) -> LogScalar:
    """``ln ||e^a||`` in the symmetric power quotient norm."""
    w = lsum(c * k for c, k in zip(weights, a) if k)
    if flavor == HERMITIAN:
        delta = sum(a)
        w = w + (lsum(log_factorial(k) for k in a) - log_factorial(delta)) / 2
    return w


def symmetric_power_norm(n: DiagonalNorm, delta: int) -> DiagonalNorm:
    """Quotient norm on ``S^delta`` with the monomial basis ``e^a``.

    Ultrametric: ``sum a_i c_i``.  Hermitian: the same plus
    ``(1/2) ln(a_1! ... a_r! / delta!)``.
    """
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    exps = list(monomials(n.dim, delta))
    labels = tuple(",".join(map(str, a)) for a in exps)
    weights = tuple(symmetric_weight(n.flavor, n.log_weights, a) for a in exps)
    return DiagonalNorm(n.flavor, labels, weights)


def determinant_log(n: DiagonalNorm) -> LogScalar:
    return lsum(n.log_weights)


def norm_distance(n1: DiagonalNorm, n2: DiagonalNorm) -> LogScalar:
    """``sup_s |ln||s|| - ln||s||'|`` for two norms diagonal in the same basis."""
    _same_flavor(n1, n2)
    if n1.basis_labels != n2.basis_labels:
        raise ValueError("norms are diagonal in different bases")
    if n1.dim == 0:
        return LogScalar.zero()
    return lmax(abs(c - d) for c, d in zip(n1.log_weights, n2.log_weights))


def vector_log_norm(n: DiagonalNorm, place: Place, coords: Sequence) -> LogScalar | float:
    coords = [as_fraction(x) for x in coords]
    if len(coords) != n.dim:
        raise ValueError("coordinate count does not match dimension")
    if not any(coords):
        raise ValueError("the zero vector has no log-norm")
    if n.flavor == ULTRAMETRIC:
        return lmax(log_abs(x, place) + c for x, c in zip(coords, n.log_weights) if x)
    terms = [(float(x), float(c)) for x, c in zip(coords, n.log_weights) if x]
    top = max(math.log(abs(x)) + c for x, c in terms)
    s = math.fsum(math.exp(2 * (math.log(abs(x)) + c - top)) for x, c in terms)
    return top + 0.5 * math.log(s)


def _sym_expansion(a: Sequence[int]) -> Counter:
    """Coefficients of ``sym(e^a) = sum_sigma x_sigma(1) (x) ... (x) x_sigma(delta)`` on tensor words."""
    word = [i for i, k in enumerate(a) for _ in range(k)]
    return Counter(permutations(word))


def antisym_image_log_norm(
    a: Sequence[int], n: DiagonalNorm, place: Place | None = None
) -> LogScalar:
    """``ln ||sym(e^a)||`` in the delta-fold tensor power of a unit norm.

    The symmetrization is expanded on tensor words (``delta <= 8``); the word
    for a multiset ``a`` occurs with coefficient ``a_1! ... a_r!``.  Ultrametric
    norms take the max of ``|coefficient|`` at ``place`` (trivial if omitted);
    hermitian norms take the Euclidean length.
    """
    if not n.is_unit():
        raise ValueError("anti-symmetrization bound is stated for unit norms")
    if len(a) != n.dim:
        raise ValueError("monomial length does not match dimension")
    delta = sum(a)
    if delta > 8:
        raise ValueError("explicit expansion limited to delta <= 8")
    coeffs = _sym_expansion(a).values()
    if n.flavor == HERMITIAN:
        return LogScalar.log(sum(c * c for c in coeffs)) / 2
    if place is None or place.flavor == "trivial":
        return LogScalar.zero()
    if place.flavor == ARCH:
        raise ValueError("ultrametric norm at an arch place")
    return lmax(log_abs(c, place) for c in coeffs)
