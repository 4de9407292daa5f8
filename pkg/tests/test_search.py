import math

import pytest
from hypothesis import given, settings, strategies as st

from pkirchhoff._search import golden_section, log_scan_minimize


@given(st.floats(-5.0, 5.0), st.floats(0.1, 10.0))
@settings(max_examples=50, deadline=None)
def test_golden_section_finds_quadratic_minimum(c, w):
    x, fx, _ = golden_section(lambda x: w * (x - c) ** 2 + 1.0, -10.0, 10.0)
    assert x == pytest.approx(c, abs=1e-6)
    assert fx == pytest.approx(1.0, abs=1e-10)


def test_log_scan_refines_in_log_variable():
    # minimum of t + 1/t at t = 1, value 2
    res = log_scan_minimize(lambda t: t + 1.0 / t, 1e-6, 1e6, npts=400, vectorized=True)
    assert not res.at_endpoint
    assert res.x == pytest.approx(1.0, rel=1e-6)
    assert res.value == pytest.approx(2.0, rel=1e-12)


def test_log_scan_reports_endpoint_minimum():
    res = log_scan_minimize(lambda t: 1.0 / t, 1e-3, 1e3, npts=100, vectorized=True)
    assert res.at_endpoint
    assert res.x == pytest.approx(1e3)


def test_refine_all_returns_smallest_tied_minimizer():
    # two equal minima at t = 1e-2 and t = 1e2 in log variable
    f = lambda t: 1.0 + (math.log(t) ** 2 - math.log(100.0) ** 2) ** 2
    res = log_scan_minimize(f, 1e-4, 1e4, npts=801, refine_all=True)
    assert res.x == pytest.approx(1e-2, rel=1e-5)
