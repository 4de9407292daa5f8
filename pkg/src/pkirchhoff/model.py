"""Model Kirchhoff term, exponents, embedding constant and hypothesis checks.

The model coefficient is ``M(t) = a + b t**(alpha-1)`` with primitive
``Mhat(t) = a t + (b/alpha) t**alpha`` and the model perturbation is
``f(t) = |t|**(q-2) t`` with primitive ``F(t) = |t|**q / q``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from scipy.special import gammaln

from ._search import golden_section

# inf_mhat_ratio scan window and resolution
SCAN_LO = 1e-8
SCAN_HI = 1e8
SCAN_POINTS = 4000


@dataclass(frozen=True)
class KirchhoffModel:
    """Kirchhoff coefficient ``M(t) = a + b t^(alpha-1)``."""

    a: float
    b: float
    alpha: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError(f"need a > 0 and b > 0, got a={self.a}, b={self.b}")
        if not self.alpha > 1:
            raise ValueError(f"need alpha > 1, got alpha={self.alpha}")

    def M(self, t):
        return self.a + self.b * np.power(t, self.alpha - 1.0)

    def Mhat(self, t):
        return self.a * t + (self.b / self.alpha) * np.power(t, self.alpha)

    def dM(self, t):
        """Derivative of ``M``; only used at ``t > 0``."""
        return self.b * (self.alpha - 1.0) * np.power(t, self.alpha - 2.0)


def sobolev_constant(N: int, p: float) -> float:
    """Embedding constant ``S = sup ||u||_{p*}^{p*} / ||grad u||_p^{p*}``.

    Computed from Talenti's optimal constant ``C`` in
    ``||u||_{p*} <= C ||grad u||_p`` on R^N, so that ``S = C**p*`` and
    ``S_N = C**-p`` is the infimum-form constant.
    """
    if not 1 < p < N:
        raise ValueError(f"need 1 < p < N, got p={p}, N={N}")
    logC = (-0.5 * math.log(math.pi) - math.log(N) / p
            + (1.0 - 1.0 / p) * math.log((p - 1.0) / (N - p))
            + (gammaln(1 + N / 2) + gammaln(N) - gammaln(N / p) - gammaln(1 + N - N / p)) / N)
    pstar = p * N / (N - p)
    return math.exp(pstar * logC)


def sobolev_constant_inf_form(N: int, p: float) -> float:
    """``S_N = inf ||grad u||_p^p / ||u||_{p*}^p``, so that ``S = S_N**(-p*/p)``."""
    pstar = p * N / (N - p)
    return sobolev_constant(N, p) ** (-p / pstar)


@dataclass(frozen=True)
class ProblemExponents:
    """Dimension and exponents of the problem.

    ``S`` defaults to the Talenti value; pass it explicitly to study other
    normalizations.
    """

    N: int
    p: float
    q: float
    S: Optional[float] = field(default=None)

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise ValueError(f"N must be an integer >= 2, got {self.N}")
        if not 1 < self.p < self.N:
            raise ValueError(f"need 1 < p < N, got p={self.p}, N={self.N}")
        if not self.p < self.q < self.pstar:
            raise ValueError(f"need p < q < p* = {self.pstar}, got q={self.q}")
        if self.S is None:
            object.__setattr__(self, "S", sobolev_constant(int(self.N), self.p))
        elif not self.S > 0:
            raise ValueError("S must be positive")

    @property
    def pstar(self) -> float:
        return self.p * self.N / (self.N - self.p)

    @property
    def kappa(self) -> float:
        """``p*/p = N/(N-p)``, the power of ``t`` in (beta1)."""
        return self.N / (self.N - self.p)


def m_eval(model: KirchhoffModel, t):
    if np.any(np.asarray(t) < 0):
        raise ValueError("M is evaluated on t >= 0")
    return model.M(t)


def mhat_eval(model: KirchhoffModel, t):
    if np.any(np.asarray(t) < 0):
        raise ValueError("Mhat is evaluated on t >= 0")
    return model.Mhat(t)


def f_model(t, q: float):
    """Model perturbation ``|t|^(q-2) t``."""
    t = np.asarray(t, dtype=float)
    return np.sign(t) * np.abs(t) ** (q - 1.0)


def F_model(t, q: float):
    """Primitive ``|t|^q / q`` of :func:`f_model`."""
    return np.abs(np.asarray(t, dtype=float)) ** q / q


# ---------------------------------------------------------------------------
# Scan oracle
# ---------------------------------------------------------------------------

class InfimumScan(NamedTuple):
    value: float
    argmin: float
    endpoint_decay: bool   # minimand still decreasing at the scan edge towards 0
    at_endpoint: bool


def scan_infimum(fn, lo: float = SCAN_LO, hi: float = SCAN_HI,
                 npts: int = SCAN_POINTS, decay_ratio: float = 0.9) -> InfimumScan:
    """Numerical ``inf_{t>0} fn(t)`` by a log scan plus golden-section refinement.

    If the grid minimum is at an endpoint the function is probed one decade
    further; a drop by more than ``1 - decay_ratio`` per decade is read as decay
    to zero and the infimum is reported as 0.
    """
    s = np.linspace(math.log(lo), math.log(hi), npts)
    with np.errstate(all="ignore"):
        vals = np.asarray(fn(np.exp(s)), dtype=float)
    i = int(np.argmin(vals))
    if 0 < i < npts - 1:
        x, v, _ = golden_section(lambda y: float(fn(math.exp(y))), s[i - 1], s[i + 1])
        return InfimumScan(float(v), math.exp(x), False, False)
    edge = s[i]
    beyond = edge + (math.log(10.0) if i == npts - 1 else -math.log(10.0))
    decaying = fn(math.exp(beyond)) < decay_ratio * vals[i]
    if decaying:
        return InfimumScan(0.0, math.exp(edge), True, True)
    return InfimumScan(float(vals[i]), math.exp(edge), False, True)


def inf_mhat_ratio(model: KirchhoffModel, exps: ProblemExponents) -> InfimumScan:
    """Oracle for ``inf_{t>0} Mhat(t) / t^(p*/p)``."""
    k = exps.kappa
    return scan_infimum(lambda t: model.Mhat(t) / t ** k)


def inf_m_ratio(model: KirchhoffModel, exps: ProblemExponents) -> InfimumScan:
    """Oracle for ``inf_{t>0} M(t) / t^(p*/p - 1)``, the (gamma1) quantity."""
    k = exps.kappa
    return scan_infimum(lambda t: model.M(t) / t ** (k - 1.0))


# ---------------------------------------------------------------------------
# Hypothesis thresholds
# ---------------------------------------------------------------------------

@dataclass
class HypothesisReport:
    rho1: bool
    rho2: bool
    rho2_witness: Optional[float]
    beta1: bool
    beta1_margin: float
    beta2: bool
    gamma1: bool
    gamma1_margin: float
    threshold_i: float
    threshold_ii: float
    lhs: float
    branch: str
    notes: list = field(default_factory=list)

    @property
    def all_hold(self) -> bool:
        return self.rho1 and self.rho2 and self.beta1 and self.beta2 and self.gamma1

    def failed(self) -> list:
        names = ("rho1", "rho2", "beta1", "beta2", "gamma1")
        return [n for n in names if not getattr(self, n)]

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["notes"] = list(self.notes)
        return d


def thresholds(model: KirchhoffModel, exps: ProblemExponents):
    """Closed-form thresholds for (beta1), (gamma1) and ``lhs = a^e b`` for ``alpha > N/(N-p)``.

    Returns ``(threshold_i, threshold_ii, lhs)``; ``nan`` thresholds when
    ``alpha <= N/(N-p)``.
    """
    N, p, S, alpha = exps.N, exps.p, exps.S, model.alpha
    d = N * (alpha - 1.0) - p * alpha
    lhs = model.a ** (d / p) * model.b
    if d <= 0 or math.isclose(alpha, exps.kappa, rel_tol=1e-12):
        return math.nan, math.nan, lhs
    ratio = d / (d + p)
    power = (N - p) * (alpha - 1.0) / p
    thr_i = ((p / exps.pstar) * S * ratio) ** power * alpha * p / d
    thr_ii = (S * ratio) ** power * p / d
    return thr_i, thr_ii, lhs


def check_hypotheses(model: KirchhoffModel, exps: ProblemExponents) -> HypothesisReport:
    """Decide (rho1), (rho2), (beta1), (beta2), (gamma1) for the model family."""
    p, pstar, S, k = exps.p, exps.pstar, exps.S, exps.kappa
    alpha, b = model.alpha, model.b
    notes = []

    rho1 = True
    rho2 = p * alpha > pstar
    witness = 0.5 * (pstar + p * alpha) if rho2 else None
    if not rho2:
        notes.append(f"rho2 fails: p*alpha = {p * alpha:g} <= p* = {pstar:g}")
    beta2 = True

    thr_i, thr_ii, lhs = thresholds(model, exps)
    crit = (p / pstar) * S
    if math.isclose(alpha, k, rel_tol=1e-12):
        branch = "alpha = N/(N-p): inf Mhat(t)/t^(p*/p) = b/alpha"
        inf_val = b / alpha
        beta1 = inf_val >= crit
        beta1_margin = inf_val - crit
        # inf M(t)/t^(p*/p-1) = b, approached as t -> infinity
        gamma1 = b > S
        gamma1_margin = b - S
    elif alpha < k:
        branch = "alpha < N/(N-p): zero-infimum branch, inf Mhat(t)/t^(p*/p) = 0"
        beta1, beta1_margin = False, -crit
        gamma1, gamma1_margin = False, -S
        notes.append("beta1 fails: alpha < N/(N-p) gives the zero-infimum branch")
    else:
        branch = "alpha > N/(N-p): closed-form thresholds"
        beta1 = lhs >= thr_i
        beta1_margin = lhs / thr_i - 1.0
        gamma1 = lhs > thr_ii
        gamma1_margin = lhs / thr_ii - 1.0
    if not gamma1 and beta1:
        notes.append("gamma1 fails while beta1 holds")
    return HypothesisReport(rho1, rho2, witness, bool(beta1), float(beta1_margin), beta2,
                            bool(gamma1), float(gamma1_margin), thr_i, thr_ii, lhs,
                            branch, notes)


class ComparisonConstant(NamedTuple):
    c_p: float
    ratio: float   # c_p / ((p/p*) S)


def comparison_cp(exps: ProblemExponents) -> ComparisonConstant:
    """Earlier semicontinuity constant ``c_p`` and its ratio to ``(p/p*) S``."""
    p, pstar, S = exps.p, exps.pstar, exps.S
    base = (p / pstar) * S
    if p >= 2:
        factor = (2.0 ** (p - 1.0) - 1.0) ** (pstar / p)
    else:
        factor = 2.0 ** (2.0 * pstar - 1.0 - pstar / p)
    return ComparisonConstant(factor * base, factor)
