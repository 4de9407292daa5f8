import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, optimize

from pkirchhoff.model import (KirchhoffModel, ProblemExponents, check_hypotheses, comparison_cp,
                              inf_m_ratio, inf_mhat_ratio, m_eval, mhat_eval, sobolev_constant,
                              sobolev_constant_inf_form, thresholds)

# Frozen oracle values for N=4, p=2 (high-precision evaluation of closed forms):
# S = 3 / (32 pi^2); with a = 1, alpha = 3 the two thresholds reduce to
# 3 S^2 / 16 and S^2 / 4.
S_4_2 = 0.00949886096646916607286369967591
THR_I_DEFAULT = 1.69178174363084137028274626594e-5
THR_II_DEFAULT = 2.25570899150778849371032835459e-5


def talenti_ratio_by_quadrature(N, p):
    """``||U||_{p*}^{p*} / ||grad U||_p^{p*}`` for the extremal profile on R^N."""
    pstar = N * p / (N - p)
    m = p / (p - 1.0)
    e = (N - p) / p
    U = lambda r: (1.0 + r ** m) ** (-e)
    dU = lambda r: e * m * r ** (m - 1.0) * (1.0 + r ** m) ** (-e - 1.0)
    crit = integrate.quad(lambda r: U(r) ** pstar * r ** (N - 1), 0, np.inf, limit=400)[0]
    grad = integrate.quad(lambda r: dU(r) ** p * r ** (N - 1), 0, np.inf, limit=400)[0]
    omega = 2 * math.pi ** (N / 2) / math.gamma(N / 2)
    return omega * crit / (omega * grad) ** (pstar / p)


def test_sobolev_constant_matches_closed_form_for_n4_p2():
    assert sobolev_constant(4, 2.0) == pytest.approx(S_4_2, rel=1e-13)
    assert sobolev_constant_inf_form(4, 2.0) == pytest.approx(8 * math.pi / math.sqrt(6), rel=1e-13)


@pytest.mark.parametrize("N,p", [(3, 2.0), (4, 2.0), (3, 1.5), (5, 3.0), (4, 1.3)])
def test_sobolev_constant_matches_extremal_quotient(N, p):
    assert sobolev_constant(N, p) == pytest.approx(talenti_ratio_by_quadrature(N, p), rel=1e-7)


@pytest.mark.parametrize("N", [3, 4, 5, 6])
def test_sobolev_constant_p2_inf_form(N):
    # S_N = pi N (N-2) (Gamma(N/2) / Gamma(N))^(2/N) for p = 2
    sn = math.pi * N * (N - 2) * (math.gamma(N / 2) / math.gamma(N)) ** (2 / N)
    assert sobolev_constant_inf_form(N, 2.0) == pytest.approx(sn, rel=1e-12)


def test_default_thresholds_frozen(model, exps):
    thr_i, thr_ii, lhs = thresholds(model, exps)
    assert thr_i == pytest.approx(THR_I_DEFAULT, rel=1e-12)
    assert thr_ii == pytest.approx(THR_II_DEFAULT, rel=1e-12)
    assert lhs == 1.0


def _numeric_inf(fn):
    res = optimize.minimize_scalar(lambda s: fn(math.exp(s)), bounds=(-60, 60), method="bounded",
                                   options={"xatol": 1e-12})
    return res.fun


@pytest.mark.parametrize("N,p,alpha,a", [(4, 2.0, 3.0, 1.0), (3, 2.0, 4.0, 0.5),
                                         (5, 1.5, 2.5, 2.0), (3, 1.2, 5.0, 1.3)])
def test_thresholds_put_infima_exactly_on_critical_levels(N, p, alpha, a):
    exps = ProblemExponents(N, p, 0.5 * (p + N * p / (N - p)))
    k = exps.kappa
    thr_i, thr_ii, _ = thresholds(KirchhoffModel(a, 1.0, alpha), exps)
    e = (N * (alpha - 1) - p * alpha) / p
    m_i = KirchhoffModel(a, thr_i / a ** e, alpha)
    m_ii = KirchhoffModel(a, thr_ii / a ** e, alpha)
    crit = p / exps.pstar * exps.S
    assert _numeric_inf(lambda t: m_i.Mhat(t) / t ** k) == pytest.approx(crit, rel=1e-9)
    assert _numeric_inf(lambda t: m_ii.M(t) / t ** (k - 1)) == pytest.approx(exps.S, rel=1e-9)


def test_defaults_satisfy_all_hypotheses(model, exps):
    rep = check_hypotheses(model, exps)
    assert rep.all_hold and rep.failed() == []
    assert rep.rho2_witness is not None and exps.pstar < rep.rho2_witness < exps.p * model.alpha


def test_zero_infimum_branch_flags_beta1():
    exps = ProblemExponents(4, 2.0, 3.0)
    rep = check_hypotheses(KirchhoffModel(1.0, 1.0, 1.5), exps)
    assert not rep.beta1 and not rep.gamma1
    assert "zero-infimum" in rep.branch
    scan = inf_mhat_ratio(KirchhoffModel(1.0, 1.0, 1.5), exps)
    assert scan.value == 0.0 and scan.endpoint_decay


def test_equality_branch_value():
    exps = ProblemExponents(4, 2.0, 3.0)
    model = KirchhoffModel(1.0, 0.7, 2.0)
    assert inf_mhat_ratio(model, exps).value == pytest.approx(0.35, abs=1e-6)
    rep = check_hypotheses(model, exps)
    assert rep.beta1 == (0.35 >= exps.S / 2)
    assert rep.gamma1 == (0.7 > exps.S)


def test_gamma1_fails_between_thresholds(exps):
    thr_i, thr_ii, _ = thresholds(KirchhoffModel(1.0, 1.0, 3.0), exps)
    rep = check_hypotheses(KirchhoffModel(1.0, 0.5 * (thr_i + thr_ii), 3.0), exps)
    assert rep.beta1 and not rep.gamma1


def test_inf_m_ratio_agrees_with_threshold_ii(exps):
    _, thr_ii, _ = thresholds(KirchhoffModel(1.0, 1.0, 3.0), exps)
    for f, expect in ((1.01, True), (0.99, False)):
        m = KirchhoffModel(1.0, f * thr_ii, 3.0)
        assert (inf_m_ratio(m, exps).value > exps.S) == expect == check_hypotheses(m, exps).gamma1


@given(t=st.floats(0.0, 1e3), s=st.floats(0.0, 1e3), a=st.floats(0.01, 10.0),
       b=st.floats(0.01, 10.0), alpha=st.floats(1.01, 6.0))
@settings(max_examples=300, deadline=None)
def test_mhat_superadditive(t, s, a, b, alpha):
    m = KirchhoffModel(a, b, alpha)
    lhs, rhs = m.Mhat(t + s), m.Mhat(t) + m.Mhat(s)
    assert lhs >= rhs - 1e-12 * abs(rhs)


@given(t=st.floats(0.0, 1e4), dt=st.floats(1e-6, 1e3), alpha=st.floats(1.01, 6.0))
@settings(max_examples=200, deadline=None)
def test_m_nondecreasing_and_mhat_increasing(t, dt, alpha):
    m = KirchhoffModel(1.0, 1.0, alpha)
    assert m.M(t + dt) >= m.M(t)
    assert m.Mhat(t + dt) > m.Mhat(t)


def test_model_validation():
    with pytest.raises(ValueError):
        KirchhoffModel(0.0, 1.0, 2.0)
    with pytest.raises(ValueError):
        KirchhoffModel(1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        ProblemExponents(4, 2.0, 5.0)
    with pytest.raises(ValueError):
        ProblemExponents(2, 2.0, 3.0)
    with pytest.raises(ValueError):
        m_eval(KirchhoffModel(1, 1, 2), -1.0)
    with pytest.raises(ValueError):
        mhat_eval(KirchhoffModel(1, 1, 2), np.array([1.0, -0.5]))


def test_comparison_constant_branches():
    e2 = ProblemExponents(4, 2.0, 3.0)
    assert comparison_cp(e2).ratio == 1.0
    e3 = ProblemExponents(5, 3.0, 4.0)
    assert comparison_cp(e3).ratio == pytest.approx(3.0 ** (7.5 / 3.0))
    e15 = ProblemExponents(3, 1.5, 2.0)
    assert comparison_cp(e15).ratio == pytest.approx(2.0 ** (2 * 3.0 - 1 - 2.0))
