import math

import pytest

from adelic.sequences import VolumeReport, fmt, parallel_map, richardson, thread_count


def test_richardson_removes_log_and_inverse_terms():
    limit = 0.7
    seq = [limit + (2 * math.log(n) + 3) / n for n in (50, 100, 200)]
    assert richardson(seq)[-1][-1] == pytest.approx(limit, abs=1e-12)


def test_richardson_polynomial_orders():
    seq = [1 + 3 / n + 5 / n**2 for n in (10, 20, 40)]
    assert richardson(seq, (1, 2))[-1][-1] == pytest.approx(1, abs=1e-12)


def test_report_csv_and_validation():
    rep = VolumeReport.from_doubling([(1, 2.0), (2, 1.5), (4, 1.25)], "t")
    assert rep.extrapolant == pytest.approx(1.0)
    lines = rep.to_csv().splitlines()
    assert lines[0] == "n,value,extrapolant"
    assert lines[-1] == "4,1.25,1"
    with pytest.raises(ValueError):
        VolumeReport.from_doubling([(1, 1.0), (3, 1.0)], "t")


def test_fmt():
    assert fmt(1 / 3) == "0.333333333333"


def test_parallel_map_is_order_preserving(monkeypatch):
    items = list(range(50))
    monkeypatch.setenv("ADELIC_THREADS", "4")
    par = parallel_map(lambda x: x * x, items)
    monkeypatch.setenv("ADELIC_THREADS", "1")
    assert par == parallel_map(lambda x: x * x, items) == [x * x for x in items]
    monkeypatch.setenv("ADELIC_THREADS", "0")
    assert thread_count() >= 1
    monkeypatch.setenv("ADELIC_THREADS", "x")
    with pytest.raises(ValueError):
        thread_count()
