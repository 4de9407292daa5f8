"""Extremal parameters ``lambda0* = inf_u lambda0(u)`` and ``lambda1* = inf_u lambda1(u)``.

Two independent estimators are provided for ``lambda0*``:

* quotient minimization: the smallest ``lambda_level(u)`` over a trial family,
  refined by descent on the unit sphere ``||u|| = 1``;
* energy-sign bisection: the smallest ``lam`` at which global minimization of
  ``Phi_lam`` finds negative energy.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .discretization import RadialFunction, RadialGrid, bubble
from .fiber import FiberConstants, FiberError, lambda0_of_u, lambda1_of_u, lambda_and_gradient
from .model import KirchhoffModel, ProblemExponents
from .solver import DescentConfig, _energy_fun, descend, minimize_global, norm, random_bumps

LAMBDA_MAX = 1e3
BISECTION_RTOL = 1e-3
ENERGY_TOL = 1e-10
DEFAULT_EPS = tuple(np.geomspace(1e-5, 1e-1, 12))
DEFAULT_BUMPS = 20


@dataclass
class TrialFamily:
    """Trial functions normalized to ``||u|| = 1``.

    ``kind`` is one of ``bubbles``, ``bumps``, ``nodal-descent`` or ``mixed``.
    Use :meth:`build` (or the named constructors) so that members get
    normalized; direct construction only checks that members are nonzero.
    """

    kind: str
    members: List[RadialFunction]
    labels: List[str] = field(default_factory=list)

    def __post_init__(self):
        for u in self.members:
            if not np.any(u.values):
                raise ValueError("trial family members must be nonzero")
        if not self.labels:
            self.labels = [f"{self.kind}[{i}]" for i in range(len(self.members))]

    def __len__(self):
        return len(self.members)

    @classmethod
    def build(cls, kind: str, members: Sequence[RadialFunction], exps: ProblemExponents,
              labels: Sequence[str] = ()) -> "TrialFamily":
        for u in members:
            if not np.any(u.values):
                raise ValueError("trial family members must be nonzero")
        normed = [u * (1.0 / norm(u, exps)) for u in members]
        return cls(kind, normed, list(labels))

    @classmethod
    def bubbles(cls, grid: RadialGrid, exps: ProblemExponents,
                eps: Sequence[float] = DEFAULT_EPS) -> "TrialFamily":
        return cls.build("bubbles", [bubble(e, grid, exps) for e in eps], exps,
                         [f"bubble(eps={e:.3e})" for e in eps])

    @classmethod
    def bumps(cls, grid: RadialGrid, exps: ProblemExponents, count: int = DEFAULT_BUMPS,
              seed: int = 42) -> "TrialFamily":
        rng = np.random.default_rng(seed)
        return cls.build("bumps", random_bumps(grid, count, rng), exps)

    @classmethod
    def default(cls, grid: RadialGrid, exps: ProblemExponents, seed: int = 42) -> "TrialFamily":
        """12 bubbles with log-spaced ``eps`` in [1e-5, 1e-1] and 20 random bumps."""
        b = cls.bubbles(grid, exps)
        m = cls.bumps(grid, exps, seed=seed)
        return cls("mixed", b.members + m.members, b.labels + m.labels)


@dataclass
class ExtremalEstimate:
    value: float
    method: str                       # "quotient-min" or "energy-bisection"
    argmin: Optional[RadialFunction]
    diagnostics: dict = field(default_factory=dict)


def _level_fn(level: int):
    if level not in (0, 1):
        raise ValueError(f"level must be 0 or 1, got {level}")
    return lambda0_of_u if level == 0 else lambda1_of_u


def member_values(level: int, family: TrialFamily, model: KirchhoffModel,
                  exps: ProblemExponents) -> np.ndarray:
    """``lambda_level(u)`` for every member; ``inf`` where the quotient has no interior minimum."""
    fn = _level_fn(level)
    out = np.empty(len(family))
    for i, u in enumerate(family.members):
        try:
            out[i] = fn(FiberConstants.of(u, exps), model, exps).lam
        except FiberError:
            out[i] = math.inf
    return out


def lambda_star(level: int, family: TrialFamily, model: KirchhoffModel, exps: ProblemExponents,
                refine: bool = True, cfg: DescentConfig | None = None) -> ExtremalEstimate:
    """Upper estimate of ``lambda_level*`` from a trial family.

    The best member is refined by Sobolev-gradient descent of
    ``u -> lambda_level(u)`` on ``||u|| = 1``, with the gradient from
    :func:`lambda_and_gradient`. The estimate never exceeds any member value.
    """
    if len(family) == 0:
        raise ValueError("empty trial family")
    vals = member_values(level, family, model, exps)
    if not np.any(np.isfinite(vals)):
        raise FiberError("no family member has an interior quotient minimum")
    i = int(np.argmin(vals))
    best = family.members[i]
    value = float(vals[i])
    diag = {"family_kind": family.kind, "family_size": len(family),
            "family_min": value, "family_max": float(np.max(vals[np.isfinite(vals)])),
            "best_member": family.labels[i], "member_values": vals.tolist(),
            "refined": False}
    if refine:
        cfg = cfg or DescentConfig(max_iters=500)
        grid = best.grid

        def fun(x):
            lam, _, g = lambda_and_gradient(x, grid, model, exps, level)
            return lam, g

        def project(x):
            return x / norm(x, exps, grid)

        r = descend(fun, best.values, grid, cfg, project=project, record=True)
        if r.energy < value:
            best, value = RadialFunction(grid, r.values), float(r.energy)
        diag.update(refined=True, refine_iterations=r.iterations, refine_status=r.status,
                    refine_residual=r.residual, refine_trace=r.trace)
    assert np.all(vals >= value - 1e-12 * abs(value)), "estimate above a member value"
    return ExtremalEstimate(value, "quotient-min", best, diag)


def lambda0_star_by_bisection(model: KirchhoffModel, exps: ProblemExponents, grid: RadialGrid,
                              lam_max: float = LAMBDA_MAX, rtol: float = BISECTION_RTOL,
                              energy_tol: float = ENERGY_TOL,
                              cfg: DescentConfig | None = None) -> ExtremalEstimate:
    """``lambda0*`` as the switch point of ``inf Phi_lam < 0``.

    The predicate at ``lam`` is that multistart global minimization finds a
    point with ``Phi_lam < -energy_tol``. Bisection on ``[0, lam_max]`` stops
    when the bracket is narrower than ``rtol`` times its upper end. If the
    predicate fails at ``lam_max`` the value is reported as ``lam_max`` with
    ``diagnostics["lower_bound_only"] = True``.
    """
    cfg = cfg or DescentConfig()
    calls = []

    def negative(lam):
        res = minimize_global(lam, model, exps, grid, cfg, stop_below=-energy_tol)
        calls.append((lam, res.energy, res.norm))
        return res.energy < -energy_tol, res

    ok, res_hi = negative(lam_max)
    if not ok:
        return ExtremalEstimate(lam_max, "energy-bisection", None,
                                {"lower_bound_only": True, "bracket": [lam_max, math.inf],
                                 "evaluations": calls})
    lo, hi = 0.0, lam_max
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        ok, res = negative(mid)
        if ok:
            hi, res_hi = mid, res
        else:
            lo = mid
    return ExtremalEstimate(0.5 * (lo + hi), "energy-bisection", res_hi.u,
                            {"lower_bound_only": False, "bracket": [lo, hi],
                             "evaluations": calls})


def extremal_report(est0: ExtremalEstimate, est1: Optional[ExtremalEstimate] = None,
                    bisection: Optional[ExtremalEstimate] = None) -> dict:
    rep = {"lambda0_star": est0.value, "method": est0.method,
           "family": {k: est0.diagnostics.get(k) for k in
                      ("family_kind", "family_size", "family_min", "family_max", "best_member")}}
    if est1 is not None:
        rep["lambda1_star"] = est1.value
        rep["ordering_holds"] = est1.value < est0.value
    if bisection is not None:
        rep["lambda0_star_bisection"] = bisection.value
        rep["bisection_bracket"] = bisection.diagnostics["bracket"]
        rep["relative_disagreement"] = abs(bisection.value - est0.value) / est0.value
    return rep


def bubble_curve(eps: Sequence[float], grid: RadialGrid, model: KirchhoffModel,
                 exps: ProblemExponents) -> List[tuple]:
    """``(eps, lambda0(u_eps), lambda1(u_eps))`` along a bubble family."""
    out = []
    for e in eps:
        fc = FiberConstants.of(bubble(e, grid, exps), exps)
        vals = []
        for fn in (lambda0_of_u, lambda1_of_u):
            try:
                vals.append(fn(fc, model, exps).lam)
            except FiberError:
                vals.append(math.nan)
        out.append((float(e), *vals))
    return out


def bubble_curve_csv(rows, header_comment: str | None = None) -> str:
    buf = io.StringIO()
    if header_comment:
        buf.write(f"# {header_comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["eps", "lambda0", "lambda1"])
    for row in rows:
        w.writerow([f"{x:.16e}" for x in row])
    return buf.getvalue()


def extremal_minimizer(est: ExtremalEstimate, model: KirchhoffModel, exps: ProblemExponents,
                       cfg: DescentConfig | None = None):
    """Nonzero minimizer of ``Phi`` at ``lam = est.value``.

    Descent starts from ``t0(w) w`` where ``w`` is the estimate's argmin; at
    the extremal parameter that point has zero energy and is nearly critical.
    Returns the :class:`~pkirchhoff.solver.DescentResult`.
    """
    cfg = cfg or DescentConfig()
    w = est.argmin
    t0 = lambda0_of_u(FiberConstants.of(w, exps), model, exps).t
    return descend(_energy_fun(est.value, model, exps, w.grid), t0 * w.values, w.grid, cfg,
                   record=True)
