import json
import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from adelic.bundles import (
    SplitAdelicBundle,
    arch_free_curve,
    cast_to_trivial,
    hn_filtration,
    line_degrees,
    positive_degree,
    symmetric_power_bundle,
)
from adelic.curve import standard_rational_curve
from adelic.graded import (
    GradedSeriesModel,
    arithmetic_volume,
    asymptotic_max_slope,
    chi_volume,
    graded_from_bundle,
    piece_filtration,
    slice_volume,
    spectral_weight,
    submultiplicativity_violations,
    volume_at,
)
from adelic.logscalar import LogScalar
from adelic.norms import monomials, symmetric_power_norm

L2 = LogScalar.log(2)
taus = st.lists(st.fractions(-3, 3, max_denominator=4), min_size=1, max_size=3)


def slice_oracle(tau, t):
    """Divided-difference formula for P(tau . u >= t) under the uniform simplex law (distinct tau)."""
    d = len(tau) - 1
    total = F(0)
    for i, ti in enumerate(tau):
        den = math.prod(ti - tj for j, tj in enumerate(tau) if j != i)
        total += max(ti - t, 0) ** d / den
    return total


def positive_part_oracle(tau):
    """(d+1) E[(tau . u)_+] = sum_i (tau_i)_+^{d+1} / prod_{j != i}(tau_i - tau_j), distinct tau."""
    total = F(0)
    for i, ti in enumerate(tau):
        den = math.prod(ti - tj for j, tj in enumerate(tau) if j != i)
        total += max(ti, 0) ** len(tau) / den
    return total


def test_linear_model_basics():
    s = GradedSeriesModel.linear([0, 1])
    assert s.d == 1
    assert s.weight(3, (1, 2)) == 2
    assert submultiplicativity_violations(s, 8) == []
    with pytest.raises(ValueError):
        s.weight(3, (1, 1))
    with pytest.raises(ValueError):
        GradedSeriesModel.linear([0, 0, 0, 1])


def test_spectral_weight_examples():
    s = GradedSeriesModel.linear([F(1, 2), 2])
    for a in monomials(2, 3):
        assert spectral_weight(s, 3, a, 5) == s.weight(3, a)
    c = F(3)
    shifted = GradedSeriesModel.from_function(1, lambda n, a: a[1] - c if n else F(0), f=lambda n: 0.0)
    vals = [spectral_weight(shifted, 1, (0, 1), N) for N in (1, 10, 100, 1000)]
    assert vals == [1 - c, 1 - c / 10, 1 - c / 100, 1 - c / 1000]
    assert all(v >= shifted.weight(1, (0, 1)) - shifted.f(1) for v in vals)
    with pytest.raises(ValueError):
        spectral_weight(s, 2, (1, 0), 3)


def test_spectral_superadditive():
    c = F(1, 2)
    s = GradedSeriesModel.from_function(1, lambda n, a: 2 * a[0] - c if n else F(0))
    for n in range(1, 6):
        for m in range(1, 6):
            for a in monomials(2, n):
                for b in monomials(2, m):
                    ab = tuple(x + y for x, y in zip(a, b))
                    lhs = spectral_weight(s, n + m, ab, 10)
                    assert lhs >= spectral_weight(s, n, a, 10) + spectral_weight(s, m, b, 10) - F(1, 10**6)


def test_piece_filtration_and_max_slope():
    s = GradedSeriesModel.linear([0, 1])
    f = piece_filtration(s, 4)
    assert f.dim == 5 and f.jumps[0][0] == LogScalar(4)
    assert asymptotic_max_slope(s, 64).extrapolant == pytest.approx(1.0, abs=1e-12)
    zero = GradedSeriesModel.linear([0, 0])
    assert asymptotic_max_slope(zero, 16).extrapolant == 0
    # spectral and raw weights agree on linear models
    spectral = GradedSeriesModel.from_function(1, lambda n, a: spectral_weight(s, n, a, 3))
    assert asymptotic_max_slope(spectral, 32).extrapolant == pytest.approx(1.0, abs=1e-12)


def test_slice_volume_examples():
    assert slice_volume([0, 1], F(1, 2)) == F(1, 2)
    assert slice_volume([0, 1], -1) == 1
    assert slice_volume([0, 1], 2) == 0
    assert slice_volume([0, 0, 3], 0) == 1
    assert slice_volume([1, 2, 3], 4) == 0
    assert slice_volume([5], 1) == 1


@given(taus, st.fractions(-4, 4, max_denominator=5))
def test_slice_volume_matches_divided_differences(tau, t):
    if len(set(tau)) == len(tau) and len(tau) > 1:
        assert slice_volume(tau, t) == slice_oracle(tau, t)


def test_volume_at_lattice_count():
    s = GradedSeriesModel.linear([0, 1])
    rep = volume_at(s, F(1, 2), 256)
    assert rep.exact == 0.5
    assert rep.extrapolant == pytest.approx(0.5, abs=1e-3)
    assert volume_at(s, -1, 32).extrapolant == pytest.approx(1.0)
    assert volume_at(s, 2, 32).tail == 0


@pytest.mark.parametrize("tau,expected", [((0, 1), 1), ((0, 0, 3), 3), ((F(-1, 2), 1, F(1, 3)), F(5, 6))])
def test_chi_volume_linear(tau, expected):
    s = GradedSeriesModel.linear(tau)
    v = chi_volume(s, 400)
    assert v.closed_form == pytest.approx(float(expected), abs=1e-12)
    assert v.meta["route_b_exact"] == expected
    assert v.value == pytest.approx(float(expected), rel=1e-6)
    # without extrapolation the top degree is already within 2%
    assert v.route_a.tail == pytest.approx(float(expected), rel=0.02)


def test_zero_volumes():
    s = GradedSeriesModel.linear([0, 0])
    assert chi_volume(s, 16).value == 0 and arithmetic_volume(s, 16).value == 0
    assert chi_volume(s, 16).route_b == 0 and arithmetic_volume(s, 16).route_b == 0


@given(taus.filter(lambda t: len(set(t)) == len(t)))
@settings(max_examples=40, deadline=None)
def test_arithmetic_volume_exact_slice(tau):
    s = GradedSeriesModel.linear(tau)
    v = arithmetic_volume(s, 8)
    assert v.meta["route_b_exact"] == positive_part_oracle(tau)
    c = chi_volume(s, 8)
    assert c.meta["route_b_exact"] == sum(tau)
    assert v.route_b >= c.route_b - 1e-12


def test_arithmetic_equals_chi_for_nonnegative_weights():
    s = GradedSeriesModel.linear([F(1, 4), 1, 2])
    assert arithmetic_volume(s, 64).meta["route_b_exact"] == chi_volume(s, 64).meta["route_b_exact"]
    with pytest.raises(ValueError):
        chi_volume(s, 2)


def test_piece_positive_degree_is_filtration_integral():
    s = GradedSeriesModel.linear([F(-1), F(1, 2), F(2, 3)])
    for n in range(1, 12):
        f = piece_filtration(s, n)
        pos = sum((w for w in s.weights(n) if w > 0), F(0))
        assert f.integral_positive() == LogScalar(pos)


def _table(d, n_max, fn):
    return {str(n): {",".join(map(str, a)): str(fn(n, a)) for a in monomials(d + 1, n)} for n in range(1, n_max + 1)}


def test_tabulated_model(tmp_path):
    data = {"d": 1, "weights": _table(1, 12, lambda n, a: F(a[1]) - F(1, 2))}
    path = tmp_path / "t.json"
    path.write_text(json.dumps(data))
    s = GradedSeriesModel.load(path)
    assert s.n_max == 12 and s.kind == "tabulated"
    assert spectral_weight(s, 1, (0, 1), 20) == 1 - F(1, 24)
    v = chi_volume(s, 12)
    assert v.route_b == pytest.approx(1.0, abs=0.1)
    assert arithmetic_volume(s, 12).route_b > 0


def test_tabulated_rejections():
    with pytest.raises(ValueError, match="incomplete"):
        GradedSeriesModel.tabulated(1, {1: {"1,0": 0}})
    with pytest.raises(ValueError, match="bounded"):
        GradedSeriesModel.tabulated(1, _table(1, 16, lambda n, a: F(n * n * a[0], 1)))
    with pytest.raises(ValueError, match="submultiplicative"):
        GradedSeriesModel.tabulated(1, _table(1, 6, lambda n, a: F(-n * n, 10)))
    ok = GradedSeriesModel.tabulated(1, _table(1, 6, lambda n, a: F(-n * n, 10)), f=lambda n: n * n / 5)
    assert ok.n_max == 6
    with pytest.raises(ValueError):
        GradedSeriesModel.from_json({"weights": {}})


def test_graded_from_bundle_arch_free():
    b = SplitAdelicBundle.from_weights(arch_free_curve(), {"t0": [0, -L2], "t1": [0, 0]})
    g = graded_from_bundle(b, 32)
    assert g.chi_volume.extrapolant == pytest.approx(math.log(2), rel=1e-9)
    assert g.closed_form == pytest.approx(math.log(2))
    lin = GradedSeriesModel.linear(line_degrees(b))
    assert chi_volume(lin, 32).closed_form == pytest.approx(math.log(2))
    assert submultiplicativity_violations(g.model, 8) == []
    for n, piece in enumerate(g.pieces[:6], start=1):
        cast = cast_to_trivial(piece)
        assert cast == symmetric_power_norm(cast_to_trivial(b), n)
        assert [-w for w in cast.log_weights] == [g.model.weight(n, a) for a in monomials(2, n)]
        assert positive_degree(piece) == hn_filtration(piece).integral_positive()


def test_graded_from_bundle_with_arch():
    b = SplitAdelicBundle.from_weights(standard_rational_curve(3), {"p2": [0, -L2]})
    g = graded_from_bundle(b, 64)
    assert g.chi_volume.extrapolant == pytest.approx(g.closed_form, rel=5e-3)
    assert submultiplicativity_violations(g.model, 8) == []
    unit = graded_from_bundle(SplitAdelicBundle.unit(arch_free_curve(), 3), 8)
    assert unit.chi_volume.extrapolant == 0 and unit.closed_form == 0
    assert symmetric_power_bundle(b, 3) == g.pieces[2]
