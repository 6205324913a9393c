import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from adelic.logscalar import (
    LogScalar,
    factorize,
    lmax,
    log_factorial,
    log_factorial_float,
    lsum,
    primes_up_to,
)

PRIMES = [2, 3, 5, 7, 11, 13]

rationals = st.fractions(min_value=-50, max_value=50, max_denominator=12)
scalars = st.builds(
    lambda c, terms: LogScalar(c, dict(terms)),
    rationals,
    st.dictionaries(st.sampled_from(PRIMES), rationals, max_size=4),
)


def test_canonical_form_drops_zero_terms():
    x = LogScalar(0, {2: 1, 3: 0})
    assert x.prime_terms == {2: Fraction(1)}
    assert (x - LogScalar.log_prime(2)).is_zero()


def test_log_decomposes_over_primes():
    assert LogScalar.log(12) == LogScalar(0, {2: 2, 3: 1})
    assert LogScalar.log(Fraction(5, 8)) == LogScalar(0, {5: 1, 2: -3})
    assert LogScalar.log(1).is_zero()
    with pytest.raises(ValueError):
        LogScalar.log(0)


def test_rejects_composite_prime_key():
    with pytest.raises(ValueError):
        LogScalar(0, {4: 1})


@given(scalars, scalars)
def test_add_sub_roundtrip(x, y):
    assert (x + y) - y == x


@given(scalars, scalars, scalars)
def test_addition_associative(x, y, z):
    assert (x + y) + z == x + (y + z)


@given(scalars)
def test_float_matches_termwise_sum(x):
    ref = float(x.constant) + sum(float(q) * math.log(p) for p, q in x.prime_terms.items())
    assert abs(float(x) - ref) <= 1e-12 * max(1.0, abs(ref))


@given(scalars, st.sampled_from(PRIMES), st.fractions(min_value=0, max_value=5, max_denominator=4))
def test_float_monotone_in_coefficient(x, p, dq):
    assert float(x + LogScalar.log_prime(p, dq)) >= float(x) - 1e-12


@given(scalars, scalars)
def test_ordering_consistent_with_floats(x, y):
    if abs(float(x) - float(y)) > 1e-6:
        assert (x < y) == (float(x) < float(y))
    assert (x == y) == ((x - y).sign() == 0)


def test_sign_resolves_near_ties():
    # 3 ln 2 - ln 8 is exactly zero; ln 2 - 0.6931471805599453 is not
    assert (LogScalar.log_prime(2, 3) - LogScalar.log(8)).sign() == 0
    near = LogScalar.log_prime(2) - Fraction(6931471805599453, 10**16)
    assert near.sign() == 1


def test_scaling_and_division():
    x = LogScalar(1, {2: 3})
    assert x * 2 == LogScalar(2, {2: 6})
    assert x / 3 == LogScalar(Fraction(1, 3), {2: 1})
    with pytest.raises(ZeroDivisionError):
        x / 0


def test_json_roundtrip():
    x = LogScalar(Fraction(-1, 2), {3: Fraction(2, 7)})
    assert LogScalar.from_json(x.to_json()) == x
    assert LogScalar.from_json("3/4") == LogScalar(Fraction(3, 4))


def test_log_factorial_matches_product():
    for n in range(0, 40):
        assert log_factorial(n) == LogScalar.log(math.factorial(n))
        assert abs(float(log_factorial(n)) - log_factorial_float(n)) < 1e-9 * max(1, n)


def test_primes_and_factorize():
    assert primes_up_to(10) == (2, 3, 5, 7)
    assert len(primes_up_to(10**4)) == 1229
    assert factorize(360) == ((2, 3), (3, 2), (5, 1))


def test_helpers():
    xs = [LogScalar.log(2), LogScalar(1), LogScalar.log(3)]
    assert lmax(xs) == LogScalar.log(3)
    assert lsum(xs) == LogScalar(1, {2: 1, 3: 1})
