"""Radial finite differences on the ball ``B_R`` in R^N.

Gradients are forward differences sampled at cell midpoints and integrated
with the midpoint rule; Lebesgue integrals use the trapezoidal rule. Both carry
the weight ``omega_{N-1} r^(N-1)``. Everything here is exactly homogeneous
under ``u -> k u``, which is what makes the discrete fibers exact powers of
``t``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np
from scipy.linalg import cho_solve_banded, cholesky_banded
from scipy.special import gammaln

from .model import KirchhoffModel, ProblemExponents


@dataclass(frozen=True)
class RadialGrid:
    """Uniform nodes ``r_i = i h`` on ``[0, R]``, ``h = R / (n - 1)``."""

    N: int
    R: float = 1.0
    n: int = 201

    def __post_init__(self):
        if self.n < 16:
            raise ValueError(f"need n >= 16 nodes, got {self.n}")
        if not self.R > 0:
            raise ValueError("R must be positive")

    @property
    def h(self) -> float:
        return self.R / (self.n - 1)

    @cached_property
    def r(self) -> np.ndarray:
        r = np.arange(self.n) * self.h
        r[-1] = self.R
        r.flags.writeable = False
        return r

    @cached_property
    def rmid(self) -> np.ndarray:
        m = 0.5 * (self.r[1:] + self.r[:-1])
        m.flags.writeable = False
        return m

    @property
    def surface_factor(self) -> float:
        """Area of the unit sphere in R^N."""
        return 2.0 * math.exp(0.5 * self.N * math.log(math.pi) - gammaln(0.5 * self.N))

    @cached_property
    def mass_weights(self) -> np.ndarray:
        """Trapezoidal weights including ``omega r^(N-1)``."""
        w = np.full(self.n, self.h)
        w[0] = w[-1] = 0.5 * self.h
        w = w * self.surface_factor * self.r ** (self.N - 1)
        w.flags.writeable = False
        return w

    @cached_property
    def grad_weights(self) -> np.ndarray:
        """Midpoint weights ``omega rmid^(N-1) h`` for the difference quotients."""
        w = self.surface_factor * self.rmid ** (self.N - 1) * self.h
        w.flags.writeable = False
        return w

    @cached_property
    def _stiffness_cholesky(self):
        # Gram matrix of the p = 2 Dirichlet form on the free nodes 0..n-2,
        # stored in upper banded form for cholesky_banded.
        c = self.grad_weights / self.h ** 2
        diag = np.zeros(self.n - 1)
        diag += c                   # each cell i touches node i ...
        diag[1:] += c[:-1]          # ... and node i+1 (last cell's right node is fixed)
        off = -c[:-1]
        ab = np.zeros((2, self.n - 1))
        ab[0, 1:] = off
        ab[1, :] = diag
        return cholesky_banded(ab)

    def sobolev_gradient(self, g: np.ndarray) -> np.ndarray:
        """Riesz representative of the nodal gradient ``g`` in the discrete H^1_0 metric.

        Solves ``K x = g`` on the free nodes, where ``u^T K u`` is the discrete
        ``||grad u||_2^2``; the boundary entry of the result is zero.
        """
        x = np.zeros(self.n)
        x[:-1] = cho_solve_banded((self._stiffness_cholesky, False), g[:-1])
        return x

    def h1_inner(self, u: np.ndarray, v: np.ndarray) -> float:
        du = np.diff(u) / self.h
        dv = np.diff(v) / self.h
        return float(np.sum(self.grad_weights * du * dv))


class RadialFunction:
    """Nodal values of a radial function with zero Dirichlet value at ``r = R``.

    Values are stored read-only. The last node is forced to zero on
    construction; a nonzero boundary value raises unless ``clamp=True``.
    """

    __slots__ = ("grid", "values")

    def __init__(self, grid: RadialGrid, values, clamp: bool = False):
        v = np.array(values, dtype=float)
        if v.shape != (grid.n,):
            raise ValueError(f"expected {grid.n} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")
        if v[-1] != 0.0:
            if not clamp:
                raise ValueError("boundary value must be zero")
            v[-1] = 0.0
        v.flags.writeable = False
        self.grid = grid
        self.values = v

    @classmethod
    def from_callable(cls, grid: RadialGrid, fn) -> "RadialFunction":
        return cls(grid, fn(grid.r), clamp=True)

    @classmethod
    def zeros(cls, grid: RadialGrid) -> "RadialFunction":
        return cls(grid, np.zeros(grid.n))

    def __mul__(self, k: float) -> "RadialFunction":
        return RadialFunction(self.grid, k * self.values)

    __rmul__ = __mul__

    def __add__(self, other: "RadialFunction") -> "RadialFunction":
        return RadialFunction(self.grid, self.values + other.values)

    def __sub__(self, other: "RadialFunction") -> "RadialFunction":
        return RadialFunction(self.grid, self.values - other.values)

    def __repr__(self):
        return f"RadialFunction(n={self.grid.n}, N={self.grid.N}, max|u|={np.max(np.abs(self.values)):.3g})"

    # serialization -------------------------------------------------------

    def to_csv(self, header_comment: str | None = None) -> str:
        buf = io.StringIO()
        if header_comment:
            buf.write(f"# {header_comment}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["r", "u"])
        for r, u in zip(self.grid.r, self.values):
            w.writerow([f"{r:.16e}", f"{u:.16e}"])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, N: int) -> "RadialFunction":
        rows = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
        reader = csv.reader(rows)
        header = next(reader)
        if header != ["r", "u"]:
            raise ValueError(f"unexpected CSV header {header}")
        data = np.array([[float(x) for x in row] for row in reader])
        r, u = data[:, 0], data[:, 1]
        grid = RadialGrid(N=N, R=float(r[-1]), n=len(r))
        if not np.allclose(r, grid.r, rtol=0, atol=1e-12 * grid.R):
            raise ValueError("CSV radii are not a uniform grid starting at 0")
        return cls(grid, u)

    def to_json(self) -> str:
        g = self.grid
        return json.dumps({"grid": {"N": g.N, "R": g.R, "n": g.n},
                           "values": [float(x) for x in self.values]})

    @classmethod
    def from_json(cls, text: str) -> "RadialFunction":
        d = json.loads(text)
        g = d["grid"]
        return cls(RadialGrid(N=int(g["N"]), R=float(g["R"]), n=int(g["n"])), d["values"])


# ---------------------------------------------------------------------------
# Norms and energy
# ---------------------------------------------------------------------------

def _gradp(values: np.ndarray, grid: RadialGrid, p: float) -> float:
    d = np.diff(values) / grid.h
    return float(np.sum(grid.grad_weights * np.abs(d) ** p))


def _gradp_derivative(values: np.ndarray, grid: RadialGrid, p: float) -> np.ndarray:
    d = np.diff(values) / grid.h
    flux = grid.grad_weights * p * np.sign(d) * np.abs(d) ** (p - 1.0) / grid.h
    g = np.zeros(grid.n)
    g[1:] += flux
    g[:-1] -= flux
    return g


def _lebesgue(values: np.ndarray, grid: RadialGrid, s: float) -> float:
    return float(np.sum(grid.mass_weights * np.abs(values) ** s))


def _lebesgue_derivative(values: np.ndarray, grid: RadialGrid, s: float) -> np.ndarray:
    return grid.mass_weights * s * np.sign(values) * np.abs(values) ** (s - 1.0)


def grad_norm_p(u: RadialFunction, exps: ProblemExponents) -> float:
    """Discrete ``||u||^p = int |grad u|^p dx``."""
    return _gradp(u.values, u.grid, exps.p)


def lebesgue_norm(u: RadialFunction, s: float) -> float:
    """Discrete ``int |u|^s dx`` (the ``s``-th power of the L^s norm)."""
    if s < 1:
        raise ValueError("s must be >= 1")
    return _lebesgue(u.values, u.grid, s)


class EnergyBreakdown(NamedTuple):
    gradp: float
    crit: float
    pert: float
    phi: float
    lam: float


def _phi(A, B, C, lam, model, exps):
    return model.Mhat(A) / exps.p - B / exps.pstar - lam * C / exps.q


def energy(u: RadialFunction, lam: float, model: KirchhoffModel,
           exps: ProblemExponents) -> EnergyBreakdown:
    """Discrete energy ``(1/p) Mhat(||u||^p) - ||u||_{p*}^{p*}/p* - lam int F(u)``."""
    A = grad_norm_p(u, exps)
    B = _lebesgue(u.values, u.grid, exps.pstar)
    C = _lebesgue(u.values, u.grid, exps.q)
    return EnergyBreakdown(A, B, C / exps.q, float(_phi(A, B, C, lam, model, exps)), lam)


def fiber_parts(values: np.ndarray, grid: RadialGrid, exps: ProblemExponents,
                with_grad: bool = False):
    """``(A, B, C)`` for nodal ``values`` and optionally their nodal gradients."""
    A = _gradp(values, grid, exps.p)
    B = _lebesgue(values, grid, exps.pstar)
    C = _lebesgue(values, grid, exps.q)
    if not with_grad:
        return A, B, C
    dA = _gradp_derivative(values, grid, exps.p)
    dB = _lebesgue_derivative(values, grid, exps.pstar)
    dC = _lebesgue_derivative(values, grid, exps.q)
    for g in (dA, dB, dC):
        g[-1] = 0.0
    return (A, B, C), (dA, dB, dC)


def energy_and_gradient(values: np.ndarray, grid: RadialGrid, lam: float,
                        model: KirchhoffModel, exps: ProblemExponents):
    """Array-level energy and exact nodal gradient (boundary entry zero)."""
    (A, B, C), (dA, dB, dC) = fiber_parts(values, grid, exps, with_grad=True)
    phi = float(_phi(A, B, C, lam, model, exps))
    g = (model.M(A) / exps.p) * dA - dB / exps.pstar - (lam / exps.q) * dC
    return phi, g


def energy_gradient(u: RadialFunction, lam: float, model: KirchhoffModel,
                    exps: ProblemExponents) -> RadialFunction:
    """Exact gradient of the discrete energy with respect to the nodal values."""
    _, g = energy_and_gradient(u.values, u.grid, lam, model, exps)
    return RadialFunction(u.grid, g)


# ---------------------------------------------------------------------------
# Talenti bubble
# ---------------------------------------------------------------------------

def cutoff(r, r_in: float):
    """C^1 cubic blend: 1 on ``[0, r_in]``, 0 beyond ``2 r_in``, ``|phi'| <= 1.5/r_in``."""
    s = np.clip((np.asarray(r, dtype=float) - r_in) / r_in, 0.0, 1.0)
    return 1.0 - 3.0 * s ** 2 + 2.0 * s ** 3


def bubble(eps: float, grid: RadialGrid, exps: ProblemExponents,
           normalized: bool = True, r_in: float | None = None) -> RadialFunction:
    """Truncated extremal profile ``phi(r) / (eps + r^(p/(p-1)))^((N-p)/p)``.

    ``r_in`` is the radius where the cutoff starts to act (default ``R/2``,
    so the support ends exactly at ``R``). With ``normalized`` the result has
    unit discrete ``||u||``.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    if r_in is None:
        r_in = 0.5 * grid.R
    if not 0 < 2 * r_in <= grid.R * (1 + 1e-12):
        raise ValueError("cutoff needs 0 < 2 r_in <= R")
    e = (exps.N - exps.p) / exps.p
    # v(0) = eps^-e must stay finite
    if e * math.log(eps) < -700.0:
        raise ValueError(f"eps too small: need eps > {math.exp(-700.0 / e):.3e} to avoid overflow")
    m = exps.p / (exps.p - 1.0)
    vals = cutoff(grid.r, r_in) * (eps + grid.r ** m) ** (-e)
    vals[-1] = 0.0
    v = RadialFunction(grid, vals)
    if normalized:
        v = v * (1.0 / grad_norm_p(v, exps) ** (1.0 / exps.p))
    return v


class BubbleAsymptotics(NamedTuple):
    eps: np.ndarray
    grad_p: np.ndarray          # ||v_eps||^p of the unnormalized bubble
    crit: np.ndarray            # ||u_eps||_{p*}^{p*} of the normalized bubble
    gap: np.ndarray             # S - crit
    grad_slope: float           # log-log slope of grad_p against eps
    gap_exponent: float         # log-log slope of gap against eps
    max_quotient: float         # max over eps of crit / S


def _loglog_slope(x, y) -> float:
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def bubble_asymptotics(eps, grid: RadialGrid, exps: ProblemExponents) -> BubbleAsymptotics:
    """Scaling of the bubble norms as ``eps -> 0``.

    Slopes are least-squares fits in log-log coordinates over all ``eps``.
    ``grid`` has to resolve the concentration scale ``eps^((p-1)/p)``.
    """
    eps = np.asarray(eps, dtype=float)
    gp, cr = [], []
    for e in eps:
        v = bubble(e, grid, exps, normalized=False)
        gp.append(grad_norm_p(v, exps))
        u = v * (1.0 / gp[-1] ** (1.0 / exps.p))
        cr.append(lebesgue_norm(u, exps.pstar))
    gp, cr = np.array(gp), np.array(cr)
    gap = exps.S - cr
    with np.errstate(all="ignore"):
        gexp = _loglog_slope(eps, gap) if np.all(gap > 0) else math.nan
    return BubbleAsymptotics(eps, gp, cr, gap, _loglog_slope(eps, gp), gexp,
                             float(np.max(cr) / exps.S))
