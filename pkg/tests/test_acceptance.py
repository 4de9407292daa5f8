"""Acceptance criteria at default parameters (N=4, p=2, q=3, alpha=3, a=b=1, R=1, n=201, seed=42).

Each test prints one PASS/FAIL line; the lines are collected in the
``acceptance criteria`` section of the pytest summary.
"""

import math

import numpy as np
import pytest

from pkirchhoff.discretization import (RadialFunction, RadialGrid, bubble_asymptotics,
                                       energy_and_gradient, energy_gradient, grad_norm_p,
                                       lebesgue_norm)
from pkirchhoff.extremal import TrialFamily, lambda0_star_by_bisection
from pkirchhoff.fiber import FiberConstants, lambda0_of_u, lambda1_of_u
from pkirchhoff.model import (KirchhoffModel, ProblemExponents, check_hypotheses, inf_mhat_ratio,
                              thresholds)
from pkirchhoff.solver import certify_nonexistence, minimize_global, mountain_pass, norm

from conftest import random_profiles

pytestmark = pytest.mark.acceptance
SEED = 42


def test_criterion_01_hypothesis_equivalence(verdict):
    rng = np.random.default_rng(SEED)
    mismatches, cases = [], 0
    for _ in range(20):
        N = int(rng.integers(3, 7))
        p = float(rng.uniform(1.2, min(N - 0.5, 4.0)))
        exps = ProblemExponents(N, p, 0.5 * (p + N * p / (N - p)))
        alpha = exps.kappa + float(rng.uniform(0.2, 3.0))
        a = float(rng.uniform(0.5, 2.0))
        thr_i, _, _ = thresholds(KirchhoffModel(a, 1.0, alpha), exps)
        e = (N * (alpha - 1) - p * alpha) / p
        b = thr_i / a ** e * (1.0 + float(rng.choice([-0.01, 0.01])))
        model = KirchhoffModel(a, b, alpha)
        oracle = inf_mhat_ratio(model, exps)
        expect = oracle.value >= p / exps.pstar * exps.S
        cases += 1
        if check_hypotheses(model, exps).beta1 != expect or oracle.at_endpoint:
            mismatches.append((N, p, alpha, a, b))
    ok = not mismatches
    verdict(1, "hypothesis equivalence", ok, f"{cases - len(mismatches)}/{cases} agree")
    assert ok, mismatches


def test_criterion_02_equality_branch_value(verdict):
    exps = ProblemExponents(4, 2.0, 3.0)
    v = inf_mhat_ratio(KirchhoffModel(1.0, 0.7, 2.0), exps)
    z = inf_mhat_ratio(KirchhoffModel(1.0, 0.7, 1.5), exps)
    ok = abs(v.value - 0.35) <= 1e-6 and z.value == 0.0 and z.endpoint_decay
    verdict(2, "equality branch value", ok,
            f"inf = {v.value:.9f} (alpha=2); alpha=1.5 flagged zero = {z.endpoint_decay}")
    assert ok


def test_criterion_03_superadditivity(verdict, model):
    rng = np.random.default_rng(SEED)
    t = 10.0 ** rng.uniform(-6, 6, 10_000)
    s = 10.0 ** rng.uniform(-6, 6, 10_000)
    lhs, rhs = model.Mhat(t + s), model.Mhat(t) + model.Mhat(s)
    bad = int(np.sum(lhs < rhs - 1e-12 * np.abs(rhs)))
    verdict(3, "superadditivity of Mhat", bad == 0, f"{bad} violations in 10^4 pairs")
    assert bad == 0


def test_criterion_04_gradient_keystone(verdict, grid, model, exps):
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for lam in (0.0, 60.0, 150.0):
        for u in random_profiles(grid, 20, int(rng.integers(1 << 30))):
            u = u * float(rng.uniform(0.2, 2.0))
            g = energy_gradient(u, lam, model, exps).values
            x = u.values
            fd = np.zeros(grid.n)
            for i in range(grid.n - 1):
                h = 1e-6 * max(1.0, abs(x[i]))
                xp, xm = x.copy(), x.copy()
                xp[i] += h
                xm[i] -= h
                fd[i] = (energy_and_gradient(xp, grid, lam, model, exps)[0]
                         - energy_and_gradient(xm, grid, lam, model, exps)[0]) / (2 * h)
            worst = max(worst, float(np.max(np.abs(fd - g)) / np.max(np.abs(g))))
    ok = worst <= 1e-6
    verdict(4, "gradient keystone", ok, f"max relative error {worst:.2e} over 60 cases")
    assert ok


def test_criterion_05_fiber_homogeneity(verdict, grid, model, exps):
    worst = 0.0
    for u in random_profiles(grid, 50, SEED):
        base = lambda0_of_u(FiberConstants.of(u, exps), model, exps).lam
        for k in (0.1, 3.0, 10.0):
            val = lambda0_of_u(FiberConstants.of(u * k, exps), model, exps).lam
            worst = max(worst, abs(val - base) / base)
    ok = worst <= 1e-8
    verdict(5, "fiber homogeneity", ok, f"max relative change {worst:.2e}")
    assert ok


def test_criterion_06_ordering(verdict, grid, model, exps, est0, est1):
    bad = 0
    for u in random_profiles(grid, 100, SEED + 1):
        fc = FiberConstants.of(u, exps)
        if not lambda1_of_u(fc, model, exps).lam < lambda0_of_u(fc, model, exps).lam:
            bad += 1
    ok = bad == 0 and est1.value < est0.value
    verdict(6, "ordering lambda1 < lambda0", ok,
            f"{bad} violations in 100; lambda1* = {est1.value:.6f} < lambda0* = {est0.value:.6f}")
    assert ok


def test_criterion_07_estimator_agreement(verdict, grid, model, exps, est0):
    bis = lambda0_star_by_bisection(model, exps, grid)
    rel = abs(bis.value - est0.value) / est0.value
    ok = rel <= 1e-2
    verdict(7, "estimator agreement", ok,
            f"quotient-min {est0.value:.6f}, bisection {bis.value:.6f}, rel. diff {rel:.2e}")
    assert ok


def test_criterion_08_trichotomy(verdict, grid, model, exps, est0):
    lam0 = est0.value
    above = minimize_global(1.1 * lam0, model, exps, grid)
    below = minimize_global(0.9 * lam0, model, exps, grid)
    at = minimize_global(lam0, model, exps, grid)
    ok_above = above.energy < -1e-6 and above.norm > 1e-3
    ok_below = abs(below.energy) <= 1e-8 and below.norm <= 1e-6
    ok_at = abs(at.energy) <= 1e-4 * abs(above.energy)
    ok = ok_above and ok_below and ok_at
    verdict(8, "trichotomy", ok,
            f"I(1.1) = {above.energy:.4e} (||u|| = {above.norm:.3f}); "
            f"I(0.9) = {below.energy:.1e} (||u|| = {below.norm:.1e}); I(1.0) = {at.energy:.1e}")
    assert ok


def test_criterion_09_bubble_asymptotics(verdict, exps):
    N, p = exps.N, exps.p
    ba = bubble_asymptotics(np.geomspace(1e-4, 1e-2, 5), RadialGrid(4, 1.0, 20001), exps)
    slope_ok = abs(ba.grad_slope + (N - p) / p) <= 0.05 * (N - p) / p
    increasing = bool(np.all(np.diff(ba.crit) < 0) and np.all(ba.gap > 0))
    gap_ok = abs(ba.gap_exponent - N / p) <= 0.15 * N / p
    quotient_ok = ba.max_quotient <= 1.03
    ok = slope_ok and increasing and gap_ok and quotient_ok
    verdict(9, "bubble asymptotics", ok,
            f"grad slope {ba.grad_slope:.4f} (target {-(N - p) / p:g}, {'ok' if slope_ok else 'off'}); "
            f"crit increasing to S {increasing}; gap exponent {ba.gap_exponent:.4f} "
            f"(target N/p = {N / p:g}, {'ok' if gap_ok else 'off'}); "
            f"max quotient/S {ba.max_quotient:.5f}")
    assert slope_ok and increasing and quotient_ok
    assert gap_ok, f"gap exponent {ba.gap_exponent:.4f} is not within 15% of N/p = {N / p:g}"


def test_criterion_10_mountain_pass(verdict, model, exps, est0, extremal_point):
    lam = est0.value * (1 - 1e-3)
    mp = mountain_pass(lam, extremal_point, model, exps)
    tol = 1e-4 * (1 + abs(mp.c_lambda))
    ok = mp.residual <= tol and mp.c_lambda >= mp.sigma > max(0.0, mp.endpoint_energy)
    verdict(10, "mountain pass", ok,
            f"c = {mp.c_lambda:.6f} >= sigma = {mp.sigma:.6f} > max(0, {mp.endpoint_energy:.3e}); "
            f"residual {mp.residual:.2e} <= {tol:.2e}")
    assert ok


def test_criterion_11_nonexistence(verdict, grid, model, exps, est0, est1):
    sample = TrialFamily.bumps(grid, exps, 50, seed=SEED)
    reps = {lam: certify_nonexistence(lam, sample, model, exps)
            for lam in (0.0, 0.5 * est1.value, 2.0 * est0.value)}
    r0, r_half, r_two = reps.values()
    ok = r0.passed and r_half.passed and not r_two.passed
    verdict(11, "nonexistence", ok,
            f"lambda=0 certified {r0.passed}; 0.5 lambda1* certified {r_half.passed}; "
            f"2 lambda0* rejected by {len(r_two.failures)}/50 samples")
    assert ok


def test_criterion_12_quadrature_convergence(verdict, exps):
    prof = lambda r: np.cos(0.5 * math.pi * r)
    gp, cr = [], []
    for n in (51, 101, 201, 401):
        u = RadialFunction.from_callable(RadialGrid(4, 1.0, n), prof)
        gp.append(grad_norm_p(u, exps))
        cr.append(lebesgue_norm(u, exps.pstar))
    ratio = lambda v: np.diff(v)[:-1] / np.diff(v)[1:]
    rg, rc = ratio(gp), ratio(cr)
    ok_g = bool(np.all(np.abs(rg - 4) <= 0.8))
    ok_c = bool(np.all(np.abs(rc - 4) <= 0.8))
    verdict(12, "quadrature convergence", ok_g and ok_c,
            f"Richardson ratios ||.||^p {np.round(rg, 3).tolist()}, "
            f"||.||_p*^p* {np.round(rc, 3).tolist()} (target 4 +- 20%)")
    assert ok_g
    assert ok_c, f"critical-norm Richardson ratios {rc} are not 4 +- 20%"
