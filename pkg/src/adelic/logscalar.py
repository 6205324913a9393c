"""Exact logarithmic quantities ``q0 + sum_p q_p ln(p)`` with rational coefficients.

Every degree, slope and log-norm in the package is carried as a
:class:`LogScalar`.  Because ``1, ln 2, ln 3, ln 5, ...`` are linearly
independent over the rationals, two LogScalars are equal exactly when their
canonical coefficient maps coincide, so ties are decided without floats.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Iterable, Mapping

import mpmath
from sympy import factorint, isprime

__all__ = [
    "LogScalar",
    "as_fraction",
    "factorize",
    "primes_up_to",
    "log_factorial",
    "log_factorial_float",
    "isprime",
]

# float differences below this are re-checked in high precision
_CLOSE = 1e-9


def as_fraction(x) -> Fraction:
    """Coerce ints, Fractions and ``"num/den"`` strings to a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"expected a rational, got {type(x).__name__}")


@lru_cache(maxsize=64)
def primes_up_to(n: int) -> tuple[int, ...]:
    """All primes ``<= n`` (sieve of Eratosthenes)."""
    if n < 2:
        return ()
    sieve = bytearray([1]) * (n + 1)
    sieve[0] = sieve[1] = 0
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p :: p] = bytearray(len(range(p * p, n + 1, p)))
    return tuple(i for i, flag in enumerate(sieve) if flag)


@lru_cache(maxsize=4096)
def factorize(n: int) -> tuple[tuple[int, int], ...]:
    """Prime factorization of a positive integer as ``((p, e), ...)``."""
    if n < 1:
        raise ValueError("factorize expects a positive integer")
    return tuple(sorted(factorint(n).items()))


class LogScalar:
    """Exact value ``constant + sum(coeff * ln(prime))``.

    Instances are immutable and hashable.  Arithmetic with ints and Fractions
    treats them as pure constants.
    """

    __slots__ = ("_constant", "_terms", "_hash")

    def __init__(self, constant=0, ln: Mapping[int, object] | None = None):
        self._constant = as_fraction(constant)
        terms = {}
        for p, q in (ln or {}).items():
            p = int(p)
            if not isprime(p):
                raise ValueError(f"{p} is not a prime")
            q = as_fraction(q)
            if q:
                terms[p] = terms.get(p, Fraction(0)) + q
        self._terms = tuple(sorted((p, q) for p, q in terms.items() if q))
        self._hash = None

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls) -> LogScalar:
        return _ZERO

    @classmethod
    def _raw(cls, constant: Fraction, terms: dict[int, Fraction]) -> LogScalar:
        obj = object.__new__(cls)
        obj._constant = constant
        obj._terms = tuple(sorted((p, q) for p, q in terms.items() if q))
        obj._hash = None
        return obj

    @classmethod
    def log(cls, x) -> LogScalar:
        """``ln(x)`` for a positive rational ``x``, decomposed over primes."""
        x = as_fraction(x)
        if x <= 0:
            raise ValueError("ln is only defined for positive rationals")
        terms: dict[int, Fraction] = {}
        if x.numerator > 1:
            for p, e in factorize(x.numerator):
                terms[p] = terms.get(p, Fraction(0)) + e
        if x.denominator > 1:
            for p, e in factorize(x.denominator):
                terms[p] = terms.get(p, Fraction(0)) - e
        return cls._raw(Fraction(0), terms)

    @classmethod
    def log_prime(cls, p: int, coeff=1) -> LogScalar:
        return cls(0, {p: coeff})

    # -- accessors --------------------------------------------------------
    @property
    def constant(self) -> Fraction:
        return self._constant

    @property
    def prime_terms(self) -> dict[int, Fraction]:
        return dict(self._terms)

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self._terms)

    def is_zero(self) -> bool:
        return not self._constant and not self._terms

    def is_rational(self) -> bool:
        return not self._terms

    # -- arithmetic -------------------------------------------------------
    @staticmethod
    def _coerce(other) -> LogScalar | None:
        if isinstance(other, LogScalar):
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return LogScalar._raw(Fraction(other), {})
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        terms = dict(self._terms)
        for p, q in other._terms:
            terms[p] = terms.get(p, Fraction(0)) + q
        return LogScalar._raw(self._constant + other._constant, terms)

    __radd__ = __add__

    def __neg__(self):
        return LogScalar._raw(-self._constant, {p: -q for p, q in self._terms})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, k):
        if isinstance(k, bool) or not isinstance(k, (int, Fraction)):
            return NotImplemented
        k = Fraction(k)
        return LogScalar._raw(self._constant * k, {p: q * k for p, q in self._terms})

    __rmul__ = __mul__

    def __truediv__(self, k):
        if isinstance(k, bool) or not isinstance(k, (int, Fraction)):
            return NotImplemented
        if k == 0:
            raise ZeroDivisionError("LogScalar division by zero")
        return self * (1 / Fraction(k))

    def __abs__(self):
        return -self if self.sign() < 0 else self

    # -- comparison -------------------------------------------------------
    def __eq__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self._constant == other._constant and self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self._constant, self._terms))
        return self._hash

    def sign(self) -> int:
        """Exact sign (0 only for the zero scalar)."""
        if self.is_zero():
            return 0
        if not self._terms:
            return 1 if self._constant > 0 else -1
        v = float(self)
        if abs(v) > _CLOSE:
            return 1 if v > 0 else -1
        with mpmath.workdps(80):
            hp = mpmath.mpf(self._constant.numerator) / self._constant.denominator
            for p, q in self._terms:
                hp += mpmath.mpf(q.numerator) / q.denominator * mpmath.log(p)
            if hp == 0:  # pragma: no cover - excluded by linear independence
                raise ArithmeticError("sign undecided at 80 digits")
            return 1 if hp > 0 else -1

    def _cmp(self, other) -> int:
        other = self._coerce(other)
        if other is None:
            other = _float_scalar(other)
        return (self - other).sign()

    def __lt__(self, other):
        if isinstance(other, float):
            return float(self) < other
        return self._cmp(other) < 0

    def __le__(self, other):
        if isinstance(other, float):
            return float(self) <= other
        return self._cmp(other) <= 0

    def __gt__(self, other):
        if isinstance(other, float):
            return float(self) > other
        return self._cmp(other) > 0

    def __ge__(self, other):
        if isinstance(other, float):
            return float(self) >= other
        return self._cmp(other) >= 0

    # -- conversion -------------------------------------------------------
    def __float__(self):
        return float(self._constant) + math.fsum(float(q) * math.log(p) for p, q in self._terms)

    def __repr__(self):
        return f"LogScalar({self})"

    def __str__(self):
        parts = []
        if self._constant or not self._terms:
            parts.append(str(self._constant))
        for p, q in self._terms:
            coeff = "" if q == 1 else ("-" if q == -1 else f"{q}*")
            parts.append(f"{coeff}ln{p}")
        return " + ".join(parts).replace("+ -", "- ")

    def to_json(self) -> dict:
        return {
            "constant": str(self._constant),
            "ln": {str(p): str(q) for p, q in self._terms},
        }

    @classmethod
    def from_json(cls, data) -> LogScalar:
        if isinstance(data, (int, str)):
            return cls(as_fraction(data))
        if not isinstance(data, Mapping):
            raise ValueError(f"malformed log scalar: {data!r}")
        return cls(data.get("constant", 0), {int(p): q for p, q in data.get("ln", {}).items()})


def _float_scalar(x):
    raise TypeError(f"cannot compare LogScalar with {type(x).__name__}")


_ZERO = LogScalar()


def lsum(values: Iterable[LogScalar]) -> LogScalar:
    """Exact sum of LogScalars with a single dictionary accumulation."""
    constant = Fraction(0)
    terms: dict[int, Fraction] = {}
    for v in values:
        v = LogScalar._coerce(v)
        constant += v._constant
        for p, q in v._terms:
            terms[p] = terms.get(p, Fraction(0)) + q
    return LogScalar._raw(constant, terms)


def lmax(values: Iterable[LogScalar]) -> LogScalar:
    it = iter(values)
    best = next(it)
    for v in it:
        if v > best:
            best = v
    return best


def lmin(values: Iterable[LogScalar]) -> LogScalar:
    it = iter(values)
    best = next(it)
    for v in it:
        if v < best:
            best = v
    return best


@lru_cache(maxsize=2048)
def log_factorial(n: int) -> LogScalar:
    """``ln(n!)`` decomposed exactly with Legendre's formula."""
    if n < 0:
        raise ValueError("factorial of a negative integer")
    terms = {}
    for p in primes_up_to(n):
        e, pk = 0, p
        while pk <= n:
            e += n // pk
            pk *= p
        terms[p] = Fraction(e)
    return LogScalar._raw(Fraction(0), terms)


def log_factorial_float(n: int) -> float:
    """Float ``ln(n!)`` via log-gamma."""
    return math.lgamma(n + 1)


__all__ += ["lsum", "lmax", "lmin"]
