"""Finite adelic curves over the rationals and the product formula."""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from fractions import Fraction
from pathlib import Path

from .logscalar import LogScalar, as_fraction, factorize, isprime, lsum, primes_up_to

__all__ = [
    "Place",
    "AdelicCurve",
    "standard_rational_curve",
    "trivial_curve",
    "log_abs",
    "product_formula_defect",
    "valuation",
]

TRIVIAL, NONARCH, ARCH = "trivial", "nonarch", "arch"


@dataclass(frozen=True)
class Place:
    """One absolute value of the family together with its mass ``nu({omega})``."""

    id: str
    flavor: str
    mass: Fraction = Fraction(1)
    prime: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "mass", as_fraction(self.mass))
        if self.flavor not in (TRIVIAL, NONARCH, ARCH):
            raise ValueError(f"unknown place flavor {self.flavor!r}")
        if self.mass < 0:
            raise ValueError("place mass must be nonnegative")
        if self.flavor == NONARCH:
            if self.prime is None or not isprime(self.prime):
                raise ValueError(f"nonarch place needs a prime, got {self.prime!r}")
        elif self.prime is not None:
            raise ValueError("only nonarch places carry a prime")

    @property
    def is_arch(self) -> bool:
        return self.flavor == ARCH

    def to_json(self) -> dict:
        flavor = {"nonarch": self.prime} if self.flavor == NONARCH else self.flavor
        return {"id": self.id, "flavor": flavor, "mass": str(self.mass)}

    @classmethod
    def from_json(cls, data: dict) -> Place:
        flavor = data["flavor"]
        if isinstance(flavor, dict):
            return cls(str(data["id"]), NONARCH, as_fraction(data.get("mass", 1)), int(flavor["nonarch"]))
        return cls(str(data["id"]), str(flavor), as_fraction(data.get("mass", 1)))


@dataclass(frozen=True)
class AdelicCurve:
    places: tuple[Place, ...]

    def __post_init__(self):
        object.__setattr__(self, "places", tuple(self.places))
        ids = [p.id for p in self.places]
        if len(set(ids)) != len(ids):
            raise ValueError("place ids must be unique")
        primes = [p.prime for p in self.places if p.flavor == NONARCH]
        if len(set(primes)) != len(primes):
            raise ValueError("nonarch places must carry distinct primes")

    @property
    def arch_mass(self) -> Fraction:
        """``nu(Omega_infinity)``."""
        return sum((p.mass for p in self.places if p.is_arch), Fraction(0))

    @property
    def is_arch_free(self) -> bool:
        return self.arch_mass == 0

    @cached_property
    def nonarch_by_prime(self) -> dict[int, Place]:
        return {p.prime: p for p in self.places if p.flavor == NONARCH}

    def place(self, place_id: str) -> Place:
        for p in self.places:
            if p.id == place_id:
                return p
        raise KeyError(place_id)

    def __iter__(self):
        return iter(self.places)

    def __len__(self):
        return len(self.places)

    def to_json(self) -> dict:
        return {"places": [p.to_json() for p in self.places]}

    @classmethod
    def from_json(cls, data: dict) -> AdelicCurve:
        try:
            return cls(tuple(Place.from_json(p) for p in data["places"]))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed curve JSON: {exc}") from exc

    @classmethod
    def load(cls, path) -> AdelicCurve:
        return cls.from_json(json.loads(Path(path).read_text()))


def standard_rational_curve(prime_bound: int) -> AdelicCurve:
    """The arch place of ``Q`` plus every ``p <= prime_bound``, all of mass 1."""
    if prime_bound < 2:
        raise ValueError("prime_bound must be at least 2")
    places = [Place("inf", ARCH)]
    places += [Place(f"p{p}", NONARCH, Fraction(1), p) for p in primes_up_to(prime_bound)]
    return AdelicCurve(tuple(places))


def trivial_curve(masses=(1,)) -> AdelicCurve:
    """Copies of the trivial absolute value with the given masses."""
    return AdelicCurve(tuple(Place(f"t{i}", TRIVIAL, m) for i, m in enumerate(masses)))


def valuation(a, p: int) -> int:
    """p-adic valuation of a nonzero rational."""
    a = as_fraction(a)
    if a == 0:
        raise ValueError("valuation of zero")
    v = 0
    num, den = a.numerator, a.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def log_abs(a, place: Place) -> LogScalar:
    """``ln|a|_omega`` for a nonzero rational.

    The arch absolute value is the usual one, ``|a|_p = p^{-v_p(a)}`` at a
    nonarch place and ``|a| = 1`` at a trivial place.
    """
    a = as_fraction(a)
    if a == 0:
        raise ValueError("ln|0| is undefined")
    if place.flavor == TRIVIAL:
        return LogScalar.zero()
    if place.flavor == NONARCH:
        return LogScalar.log_prime(place.prime, -valuation(a, place.prime))
    return LogScalar.log(abs(a))


def product_formula_defect(a, curve: AdelicCurve) -> LogScalar:
    """``sum_omega nu(omega) ln|a|_omega``; zero whenever the curve sees every prime of ``a``.

    Nonarch places not dividing ``a`` contribute nothing and are skipped.
    """
    a = as_fraction(a)
    if a == 0:
        raise ValueError("ln|0| is undefined")
    terms = [log_abs(a, p) * p.mass for p in curve.places if p.flavor == ARCH]
    by_prime = curve.nonarch_by_prime
    for part in (abs(a.numerator), a.denominator):
        for q, _ in factorize(part) if part > 1 else ():
            place = by_prime.get(q)
            if place is not None:
                terms.append(log_abs(a, place) * place.mass)
    return lsum(terms)
