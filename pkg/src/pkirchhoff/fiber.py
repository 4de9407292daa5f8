"""Fiber maps ``psi(t) = Phi_lambda(t u)`` and the per-function parameters.

For the model nonlinearities the fiber of ``u`` depends on ``u`` only through

    A = ||u||^p,   B = ||u||_{p*}^{p*},   C = ||u||_q^q,

so that

    psi(t) = Mhat(t^p A)/p - t^{p*} B/p* - lam t^q C/q.

``lambda0(u)`` is the infimum over ``t`` of the value of ``lam`` that makes
``psi(t) = 0`` and ``lambda1(u)`` the same for ``psi'(t) = 0``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from ._search import log_scan_minimize
from .discretization import RadialFunction, fiber_parts
from .model import KirchhoffModel, ProblemExponents

T_LO = 1e-6
T_HI = 1e6
T_POINTS = 4000


class FiberError(RuntimeError):
    """The quotient minimum could not be bracketed inside the scan window."""


@dataclass(frozen=True)
class FiberConstants:
    A: float
    B: float
    C: float

    def __post_init__(self):
        if not (self.A > 0 and self.B > 0 and self.C > 0):
            raise ValueError("fiber constants need u != 0")

    @classmethod
    def of(cls, u: RadialFunction, exps: ProblemExponents) -> "FiberConstants":
        return cls(*fiber_parts(u.values, u.grid, exps))

    def scaled(self, k: float, exps: ProblemExponents) -> "FiberConstants":
        """Constants of ``k u``."""
        k = abs(k)
        return FiberConstants(k ** exps.p * self.A, k ** exps.pstar * self.B, k ** exps.q * self.C)


def psi(fc: FiberConstants, lam, t, model: KirchhoffModel, exps: ProblemExponents):
    t = np.asarray(t, dtype=float)
    p, ps, q = exps.p, exps.pstar, exps.q
    return model.Mhat(t ** p * fc.A) / p - t ** ps * fc.B / ps - lam * t ** q * fc.C / q


def d_psi(fc: FiberConstants, lam, t, model: KirchhoffModel, exps: ProblemExponents):
    t = np.asarray(t, dtype=float)
    p, ps, q = exps.p, exps.pstar, exps.q
    return (model.M(t ** p * fc.A) * t ** (p - 1) * fc.A
            - t ** (ps - 1) * fc.B - lam * t ** (q - 1) * fc.C)


def dd_psi(fc: FiberConstants, lam, t, model: KirchhoffModel, exps: ProblemExponents):
    t = np.asarray(t, dtype=float)
    p, ps, q = exps.p, exps.pstar, exps.q
    s = t ** p * fc.A
    return (model.dM(s) * p * t ** (2 * p - 2) * fc.A ** 2
            + model.M(s) * (p - 1) * t ** (p - 2) * fc.A
            - (ps - 1) * t ** (ps - 2) * fc.B
            - lam * (q - 1) * t ** (q - 2) * fc.C)


def zero_level_quotient(fc: FiberConstants, t, model: KirchhoffModel, exps: ProblemExponents):
    """``Lambda_u(t)``: the ``lam`` for which ``psi(t) = 0``."""
    t = np.asarray(t, dtype=float)
    p, ps, q = exps.p, exps.pstar, exps.q
    return q * (model.Mhat(t ** p * fc.A) / p - t ** ps * fc.B / ps) / (t ** q * fc.C)


def critical_quotient(fc: FiberConstants, t, model: KirchhoffModel, exps: ProblemExponents):
    """``Theta_u(t)``: the ``lam`` for which ``psi'(t) = 0``."""
    t = np.asarray(t, dtype=float)
    p, ps, q = exps.p, exps.pstar, exps.q
    return (model.M(t ** p * fc.A) * t ** (p - 1) * fc.A - t ** (ps - 1) * fc.B) / (t ** (q - 1) * fc.C)


class FiberExtremum(NamedTuple):
    lam: float
    t: float
    bracket: tuple
    iterations: int


@dataclass
class FiberSolution:
    lambda0: float
    t0: float
    lambda1: Optional[float] = None
    t1: Optional[float] = None
    diagnostics: dict = None


def _minimize_quotient(fn, what: str, lo=T_LO, hi=T_HI, npts=T_POINTS) -> FiberExtremum:
    res = log_scan_minimize(fn, lo, hi, npts=npts, refine_all=True, vectorized=True)
    if res.at_endpoint:
        raise FiberError(f"{what}: minimum not bracketed in t in [{lo:g}, {hi:g}] "
                         f"(grid minimum at t = {res.x:g}); check rho2 and the scale of u")
    return FiberExtremum(res.value, res.x, res.bracket, res.iterations)


def lambda0_of_u(fc: FiberConstants, model: KirchhoffModel, exps: ProblemExponents,
                 lo: float = T_LO, hi: float = T_HI, npts: int = T_POINTS) -> FiberExtremum:
    """``(lambda0(u), t0(u))`` as the minimum and minimizer of ``Lambda_u``."""
    return _minimize_quotient(lambda t: zero_level_quotient(fc, t, model, exps),
                              "lambda0", lo, hi, npts)


def lambda1_of_u(fc: FiberConstants, model: KirchhoffModel, exps: ProblemExponents,
                 lo: float = T_LO, hi: float = T_HI, npts: int = T_POINTS) -> FiberExtremum:
    """``(lambda1(u), t1(u))`` as the minimum and minimizer of ``Theta_u``."""
    return _minimize_quotient(lambda t: critical_quotient(fc, t, model, exps),
                              "lambda1", lo, hi, npts)


def solve_fiber(fc: FiberConstants, model: KirchhoffModel, exps: ProblemExponents,
                with_lambda1: bool = True) -> FiberSolution:
    r0 = lambda0_of_u(fc, model, exps)
    diag = {"lambda0_bracket": r0.bracket, "lambda0_iterations": r0.iterations}
    sol = FiberSolution(r0.lam, r0.t, diagnostics=diag)
    if with_lambda1:
        r1 = lambda1_of_u(fc, model, exps)
        sol.lambda1, sol.t1 = r1.lam, r1.t
        diag.update(lambda1_bracket=r1.bracket, lambda1_iterations=r1.iterations)
    return sol


def _terms(fc: FiberConstants, lam, t, model, exps, level: int):
    """The three additive terms of ``psi`` (level 0) or ``psi'`` (level 1)."""
    t = np.asarray(t, dtype=float)
    p, ps, q = exps.p, exps.pstar, exps.q
    if level == 0:
        return (model.Mhat(t ** p * fc.A) / p, -t ** ps * fc.B / ps, -lam * t ** q * fc.C / q)
    return (model.M(t ** p * fc.A) * t ** (p - 1) * fc.A, -t ** (ps - 1) * fc.B,
            -lam * t ** (q - 1) * fc.C)


def system_residuals(fc: FiberConstants, lam: float, t: float, model, exps, level: int = 0,
                     grid: np.ndarray | None = None) -> dict:
    """Relative residuals of the defining system at ``(lam, t)``.

    Level 0 checks ``psi(t) = 0``, ``psi'(t) = 0`` and ``psi >= 0`` on ``grid``;
    level 1 does the same one derivative higher. Each value is divided by the
    sum of the absolute values of its terms at the same ``t``, and the
    derivative is taken in ``log t``.
    """
    if grid is None:
        grid = np.geomspace(T_LO, T_HI, T_POINTS)
    f, df = (psi, d_psi) if level == 0 else (d_psi, dd_psi)
    scale_t = sum(abs(x) for x in _terms(fc, lam, t, model, exps, level))
    with np.errstate(all="ignore"):
        vals = f(fc, lam, grid, model, exps)
        scales = sum(np.abs(x) for x in _terms(fc, lam, grid, model, exps, level))
        rel = vals / scales
    rel = rel[np.isfinite(rel)]
    return {
        "value": float(f(fc, lam, t, model, exps)) / scale_t,
        "derivative": float(df(fc, lam, t, model, exps)) * t / scale_t,
        "min_on_grid": float(np.min(rel)),
        "scale": float(scale_t),
    }


def lambda_and_gradient(values: np.ndarray, grid, model: KirchhoffModel,
                        exps: ProblemExponents, level: int = 0):
    """``lambda_level(u)`` with its nodal gradient, via the envelope theorem.

    At the minimizing ``t`` the quotient is stationary in ``t``, so the
    derivative of the infimum only goes through ``(A, B, C)``.
    Returns ``(lam, t, gradient)``.
    """
    (A, B, C), (dA, dB, dC) = fiber_parts(values, grid, exps, with_grad=True)
    fc = FiberConstants(A, B, C)
    p, ps, q = exps.p, exps.pstar, exps.q
    if level == 0:
        lam, t, _, _ = lambda0_of_u(fc, model, exps)
        dLA = q * model.M(t ** p * A) * t ** p / p / (t ** q * C)
        dLB = -q * t ** ps / ps / (t ** q * C)
    else:
        lam, t, _, _ = lambda1_of_u(fc, model, exps)
        s = t ** p * A
        den = t ** (q - 1) * C
        dLA = (model.dM(s) * t ** p * t ** (p - 1) * A + model.M(s) * t ** (p - 1)) / den
        dLB = -t ** (ps - 1) / den
    dLC = -lam / C
    return lam, t, dLA * dA + dLB * dB + dLC * dC


def fiber_profile_csv(fc: FiberConstants, lam: float, t: np.ndarray, model, exps,
                      header_comment: str | None = None) -> str:
    """CSV with columns ``t, psi, dpsi, Lambda, Theta``."""
    buf = io.StringIO()
    if header_comment:
        buf.write(f"# {header_comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "psi", "dpsi", "Lambda", "Theta"])
    with np.errstate(all="ignore"):
        cols = [t, psi(fc, lam, t, model, exps), d_psi(fc, lam, t, model, exps),
                zero_level_quotient(fc, t, model, exps), critical_quotient(fc, t, model, exps)]
    for row in zip(*cols):
        w.writerow([f"{x:.16e}" for x in row])
    return buf.getvalue()
