import math
import random

import pytest
from hypothesis import given, strategies as st

from adelic.bundles import SplitAdelicBundle, arch_free_curve, hn_filtration, random_split_bundle
from adelic.curve import standard_rational_curve, trivial_curve
from adelic.logscalar import LogScalar
from adelic.partitions import (
    Partition,
    cauchy_dimension_check,
    composition_dimension,
    hn_sym_dimensions,
    partitions,
    schur_dimension,
    schur_dimension_jacobi_trudi,
    slope_identity_check,
    symmetric_filtration_dimensions,
    symmetric_slope_check,
    transpose,
)

parts = st.lists(st.integers(1, 7), max_size=7).map(lambda xs: Partition(tuple(sorted(xs, reverse=True))))


def test_transpose_examples():
    assert transpose(Partition((3, 1))) == Partition((2, 1, 1))
    assert transpose(Partition((4,))) == Partition((1, 1, 1, 1))
    assert transpose(Partition(())) == Partition(())


@given(parts)
def test_transpose_involution(lam):
    t = transpose(lam)
    assert t.weight == lam.weight
    assert transpose(t) == lam


def test_partition_validation():
    with pytest.raises(ValueError):
        Partition((1, 2))
    assert Partition((2, 1, 0)).parts == (2, 1)


def test_partition_counts():
    assert [len(list(partitions(n))) for n in range(8)] == [1, 1, 2, 3, 5, 7, 11, 15]


@pytest.mark.parametrize("r", range(1, 6))
@pytest.mark.parametrize("delta", range(0, 6))
def test_schur_extremes(r, delta):
    assert schur_dimension(Partition((delta,)), r) == math.comb(r, delta)
    assert schur_dimension(Partition((1,) * delta), r) == math.comb(r + delta - 1, delta)


def test_schur_example():
    assert schur_dimension(Partition((2, 1)), 2) == 2
    assert schur_dimension(Partition((2, 2)), 2) == 1
    assert schur_dimension(Partition((3,)), 2) == 0


@pytest.mark.parametrize("delta", range(0, 6))
def test_schur_routes_agree(delta):
    for lam in partitions(delta):
        for r in range(1, 6):
            d = schur_dimension(lam, r)
            assert d == schur_dimension_jacobi_trudi(lam, r)
            # zero exactly when a row is longer than r
            assert (d == 0) == (bool(lam.parts) and lam.parts[0] > r)


def test_cauchy_examples():
    assert cauchy_dimension_check(3, 2, 0)[0]
    ok, ledger = cauchy_dimension_check(2, 2, 2)
    assert ok
    assert sorted(e["product"] for e in ledger) == [1, 9]


def test_cauchy_exhaustive():
    assert all(cauchy_dimension_check(a, b, d)[0] for a in range(1, 5) for b in range(1, 5) for d in range(6))


def test_slope_identity():
    assert slope_identity_check(2, 0)
    assert slope_identity_check(2, 3)
    assert all(slope_identity_check(r, d) for r in range(2, 21) for d in range(41))
    with pytest.raises(ValueError):
        slope_identity_check(1, 2)


def test_symmetric_slope_examples():
    unit = SplitAdelicBundle.unit(arch_free_curve(), 3)
    rep = symmetric_slope_check(unit, 4)
    assert rep.ok and rep.slope == 0
    t = trivial_curve()
    b = SplitAdelicBundle.from_weights(t, {"t0": [0, -LogScalar.log(2)]})
    rep = symmetric_slope_check(b, 2)
    assert rep.slope_exact and rep.slope == pytest.approx(math.log(2))


@pytest.mark.parametrize("seed", range(50))
def test_symmetric_slope_fuzz(seed):
    rng = random.Random(seed)
    curve = arch_free_curve() if seed % 2 else standard_rational_curve(7)
    b = random_split_bundle(rng, curve, dim=rng.randint(1, 3))
    rep = symmetric_slope_check(b, rng.randint(1, 5))
    assert rep.ok


def test_composition_dimension():
    out = composition_dimension([2, 1], 2)
    assert out == {(0, 2): 1, (1, 1): 2, (2, 0): 3}
    assert sum(out.values()) == math.comb(4, 2)


@pytest.mark.parametrize("seed", range(20))
def test_filtration_dimensions_of_symmetric_power(seed):
    rng = random.Random(seed)
    b = random_split_bundle(rng, arch_free_curve(), dim=rng.randint(1, 4))
    delta = rng.randint(0, 4)
    assert symmetric_filtration_dimensions(hn_filtration(b), delta) == hn_sym_dimensions(b, delta)
