import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from adelic.curve import (
    ARCH,
    NONARCH,
    AdelicCurve,
    Place,
    log_abs,
    product_formula_defect,
    standard_rational_curve,
    trivial_curve,
    valuation,
)
from adelic.logscalar import LogScalar

nonzero = st.fractions(min_value=-10**6, max_value=10**6, max_denominator=10**4).filter(lambda x: x != 0)


def test_standard_curve_places():
    assert [p.id for p in standard_rational_curve(2)] == ["inf", "p2"]
    assert [p.prime for p in standard_rational_curve(5) if p.flavor == NONARCH] == [2, 3, 5]
    assert len(standard_rational_curve(10)) == 5
    with pytest.raises(ValueError):
        standard_rational_curve(1)


def test_log_abs_examples():
    c = standard_rational_curve(5)
    for p in c:
        assert log_abs(1, p).is_zero()
    assert log_abs(6, c.place("p2")) == -LogScalar.log(2)
    assert log_abs(6, c.place("inf")) == LogScalar.log(2) + LogScalar.log(3)
    assert log_abs(Fraction(-3, 4), c.place("p2")) == LogScalar.log_prime(2, 2)
    assert log_abs(7, trivial_curve().places[0]).is_zero()
    with pytest.raises(ValueError):
        log_abs(0, c.place("inf"))


def test_defect_examples():
    assert product_formula_defect(1, standard_rational_curve(5)).is_zero()
    assert product_formula_defect(6, standard_rational_curve(5)).is_zero()
    assert product_formula_defect(6, standard_rational_curve(2)) == LogScalar.log(3)
    with pytest.raises(ValueError):
        product_formula_defect(0, standard_rational_curve(2))


def test_defect_matches_placewise_sum():
    # the skipped places really contribute nothing
    c = standard_rational_curve(50)
    rng = random.Random(3)
    for _ in range(50):
        a = Fraction(rng.randint(-10**5, 10**5) or 1, rng.randint(1, 10**5))
        full = sum((log_abs(a, p) * p.mass for p in c), LogScalar.zero())
        assert product_formula_defect(a, c) == full


@given(nonzero, nonzero)
def test_defect_additive(a, b):
    c = standard_rational_curve(13)
    assert product_formula_defect(a * b, c) == product_formula_defect(a, c) + product_formula_defect(b, c)


def test_valuation():
    assert valuation(Fraction(12, 5), 2) == 2
    assert valuation(Fraction(12, 5), 5) == -1
    assert valuation(7, 3) == 0


def test_place_validation():
    with pytest.raises(ValueError):
        Place("x", NONARCH, 1, 4)
    with pytest.raises(ValueError):
        Place("x", ARCH, -1)
    with pytest.raises(ValueError):
        Place("x", "complex")
    with pytest.raises(ValueError):
        AdelicCurve((Place("a", ARCH), Place("a", NONARCH, 1, 2)))
    with pytest.raises(ValueError):
        AdelicCurve((Place("a", NONARCH, 1, 2), Place("b", NONARCH, 1, 2)))


def test_arch_mass():
    c = AdelicCurve((Place("inf", ARCH, Fraction(1, 2)), Place("p3", NONARCH, 2, 3)))
    assert c.arch_mass == Fraction(1, 2)
    assert not c.is_arch_free
    assert trivial_curve((1, 2)).is_arch_free


def test_json_roundtrip(tmp_path):
    c = standard_rational_curve(7)
    data = json.loads(json.dumps(c.to_json()))
    assert data["places"][1]["flavor"] == {"nonarch": 2}
    assert AdelicCurve.from_json(data) == c
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"places": [{"id": "t", "flavor": "trivial", "mass": "1/3"}]}))
    assert AdelicCurve.load(path).places[0].mass == Fraction(1, 3)
    with pytest.raises(ValueError):
        AdelicCurve.from_json({"places": [{"flavor": "arch"}]})
