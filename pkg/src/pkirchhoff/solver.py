"""Energy minimization, local minimization near the extremal minimizer,
mountain-pass search and nonexistence certification.

All descent directions are Sobolev gradients: the nodal gradient mapped
through the discrete H^1_0 Gram matrix (``RadialGrid.sobolev_gradient``). The
reported residual of a point is the max-norm of that Sobolev gradient.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from .discretization import (RadialFunction, RadialGrid, bubble, energy_and_gradient,
                             grad_norm_p)
from .fiber import FiberConstants, FiberError, T_HI, T_LO, T_POINTS, d_psi, lambda0_of_u, lambda1_of_u
from .model import KirchhoffModel, ProblemExponents

log = logging.getLogger(__name__)

DIVERGENCE_LEVEL = -1e12


class DivergenceError(RuntimeError):
    """Energy ran below ``DIVERGENCE_LEVEL``: the functional is not bounded below."""


class GeometryError(RuntimeError):
    """The mountain-pass geometry does not hold for the given endpoint."""


@dataclass
class DescentConfig:
    max_iters: int = 5000
    gtol: float = 1e-8          # relative to (1 + |Phi|)
    step0: float = 1.0
    shrink: float = 0.5
    c1: float = 1e-4            # sufficient-decrease factor
    multistarts: int = 8
    seed: int = 42
    max_backtracks: int = 60
    bb_step: bool = True        # Barzilai-Borwein trial step after the first iteration

    def __post_init__(self):
        if not self.gtol > 0:
            raise ValueError("gtol must be positive")
        if self.multistarts < 1:
            raise ValueError("need at least one start")


@dataclass
class DescentResult:
    values: np.ndarray
    energy: float
    residual: float
    iterations: int
    converged: bool
    trace: list = field(default_factory=list)   # (iteration, energy, residual)
    status: str = ""


def descend(fun: Callable, x0: np.ndarray, grid: RadialGrid, cfg: DescentConfig,
            project: Optional[Callable] = None, stop_below: Optional[float] = None,
            record: bool = False) -> DescentResult:
    """Backtracking Sobolev-gradient descent.

    ``fun(x)`` returns ``(value, nodal_gradient)``. Each iteration tries the
    step ``s * P^-1 g`` with ``s`` starting at ``cfg.step0`` and halving until
    the Armijo condition holds, so accepted values never increase. An optional
    ``project`` maps trial points back onto a feasible set. The loop stops when
    the Sobolev-gradient max-norm falls below ``gtol * (1 + |value|)``, when the
    value drops below ``stop_below``, or when no step decreases the value.
    """
    x = np.array(x0, dtype=float)
    x[-1] = 0.0
    f, g = fun(x)
    trace = []
    status = "max_iters"
    converged = False
    it = 0
    sg = grid.sobolev_gradient(g)
    res = float(np.max(np.abs(sg)))
    s_trial = cfg.step0
    for it in range(1, cfg.max_iters + 1):
        if record:
            trace.append((it - 1, f, res))
        if res <= cfg.gtol * (1.0 + abs(f)):
            converged, status = True, "gtol"
            it -= 1
            break
        if stop_below is not None and f < stop_below:
            status = "stop_below"
            it -= 1
            break
        slope = float(np.dot(g, sg))
        s = s_trial
        accepted = False
        for _ in range(cfg.max_backtracks):
            xt = x - s * sg
            if project is not None:
                xt = project(xt)
            ft, gt = fun(xt)
            decrease = f - ft
            if project is None:
                ok = np.isfinite(ft) and decrease >= cfg.c1 * s * slope
            else:
                ok = np.isfinite(ft) and decrease >= cfg.c1 * float(np.dot(g, x - xt))
            if ok:
                accepted = True
                break
            s *= cfg.shrink
        if not accepted:
            status = "stalled"
            # a stalled line search at round-off level counts as converged
            converged = res <= 1e3 * cfg.gtol * (1.0 + abs(f))
            it -= 1
            break
        dx, dg = xt - x, gt - g
        x, f, g = xt, ft, gt
        if cfg.bb_step:
            # BB1 step in the H^1_0 metric: <dx, K dx> / <dx, dg>
            curv = float(np.dot(dx, dg))
            kdx = grid.h1_inner(dx, dx)
            s_trial = kdx / curv if curv > 0 else cfg.step0
            s_trial = min(max(s_trial, 1e-6 * cfg.step0), 1e6 * cfg.step0)
        if f < DIVERGENCE_LEVEL:
            raise DivergenceError(f"energy {f:.3e} below {DIVERGENCE_LEVEL:g}; "
                                  "the functional is not bounded below (check beta1/rho2)")
        sg = grid.sobolev_gradient(g)
        res = float(np.max(np.abs(sg)))
    else:
        it = cfg.max_iters
        converged = res <= cfg.gtol * (1.0 + abs(f))
        if converged:
            status = "gtol"
    if record:
        trace.append((it, f, res))
    return DescentResult(x, f, res, it, converged, trace, status)


def _energy_fun(lam, model, exps, grid):
    return lambda x: energy_and_gradient(x, grid, lam, model, exps)


def residual(u: RadialFunction, lam: float, model: KirchhoffModel, exps: ProblemExponents) -> float:
    """Max-norm of the Sobolev gradient of the energy at ``u``."""
    _, g = energy_and_gradient(u.values, u.grid, lam, model, exps)
    return float(np.max(np.abs(u.grid.sobolev_gradient(g))))


def norm(u: RadialFunction | np.ndarray, exps: ProblemExponents, grid: RadialGrid | None = None) -> float:
    """``||u|| = (int |grad u|^p)^(1/p)``."""
    if isinstance(u, RadialFunction):
        return grad_norm_p(u, exps) ** (1.0 / exps.p)
    d = np.diff(u) / grid.h
    return float(np.sum(grid.grad_weights * np.abs(d) ** exps.p)) ** (1.0 / exps.p)


# ---------------------------------------------------------------------------
# Starting points
# ---------------------------------------------------------------------------

def random_bumps(grid: RadialGrid, count: int, rng: np.random.Generator,
                 n_terms: int = 3) -> List[RadialFunction]:
    """Random smooth radial profiles: sums of Gaussians times ``1 - (r/R)^2``."""
    R = grid.R
    out = []
    for _ in range(count):
        amp = rng.uniform(0.2, 1.0, n_terms)
        cen = rng.uniform(0.0, 0.8 * R, n_terms)
        wid = rng.uniform(0.05, 0.4, n_terms) * R
        r = grid.r[:, None]
        vals = np.sum(amp * np.exp(-((r - cen) / wid) ** 2), axis=1) * (1.0 - (grid.r / R) ** 2)
        out.append(RadialFunction(grid, vals, clamp=True))
    return out


def default_starts(lam: float, model: KirchhoffModel, exps: ProblemExponents, grid: RadialGrid,
                   cfg: DescentConfig, extra: Sequence[RadialFunction] = ()) -> List[np.ndarray]:
    """Multistart points: small perturbations of 0, bubbles, bumps and fiber dilations."""
    rng = np.random.default_rng(cfg.seed)
    starts = []
    for u in random_bumps(grid, max(1, cfg.multistarts // 4), rng):
        starts.append(1e-3 * u.values)
    shapes = [bubble(eps, grid, exps) for eps in (1e-1, 1e-2)]
    shapes += random_bumps(grid, max(2, cfg.multistarts // 2), rng)
    shapes += list(extra)
    for u in shapes:
        fc = FiberConstants.of(u, exps)
        try:
            t0 = lambda0_of_u(fc, model, exps).t
        except FiberError:
            t0 = 1.0
        starts.append(t0 * u.values)
    return starts


# ---------------------------------------------------------------------------
# Global and local minimization
# ---------------------------------------------------------------------------

@dataclass
class MinimizationResult:
    u: RadialFunction
    energy: float
    residual: float
    converged: bool
    runs: list = field(default_factory=list)   # per-start (energy, norm, residual, iterations, status)
    trace: list = field(default_factory=list)
    interior: Optional[bool] = None
    message: str = ""
    norm: float = math.nan                     # ||u|| of the returned point


def minimize_global(lam: float, model: KirchhoffModel, exps: ProblemExponents, grid: RadialGrid,
                    cfg: DescentConfig | None = None, starts: Sequence | None = None,
                    extra_starts: Sequence[RadialFunction] = (),
                    stop_below: Optional[float] = None) -> MinimizationResult:
    """Multistart descent for ``inf Phi_lambda``; returns the best final point.

    ``starts`` replaces the default start set; ``extra_starts`` are shapes that
    are added to it after rescaling by their fiber minimizer ``t0``. With
    ``stop_below`` the search ends as soon as any run reaches that energy.
    """
    cfg = cfg or DescentConfig()
    if starts is None:
        starts = default_starts(lam, model, exps, grid, cfg, extra_starts)
    fun = _energy_fun(lam, model, exps, grid)
    runs, best = [], None
    for x0 in starts:
        x0 = x0.values if isinstance(x0, RadialFunction) else x0
        r = descend(fun, x0, grid, cfg, stop_below=stop_below, record=True)
        nrm = norm(r.values, exps, grid)
        runs.append((r.energy, nrm, r.residual, r.iterations, r.status))
        if best is None or r.energy < best.energy:
            best = r
        if stop_below is not None and r.energy < stop_below:
            break
    u = RadialFunction(grid, best.values)
    return MinimizationResult(u, best.energy, best.residual, best.converged, runs, best.trace,
                              norm=norm(u, exps))


def minimize_local(lam: float, warm_start: RadialFunction, model: KirchhoffModel,
                   exps: ProblemExponents, delta: float | None = None,
                   cfg: DescentConfig | None = None) -> MinimizationResult:
    """Descent restricted to the ball ``||u - warm_start|| <= delta``.

    Points leaving the ball are pulled back along the segment towards
    ``warm_start``. ``interior`` is False if the constraint is active at
    termination, in which case no interior local minimizer is certified.
    """
    cfg = cfg or DescentConfig()
    grid = warm_start.grid
    w = warm_start.values
    if delta is None:
        delta = 0.2 * norm(warm_start, exps)

    def project(x):
        d = norm(x - w, exps, grid)
        if d <= delta:
            return x
        return w + (x - w) * (delta / d)

    r = descend(_energy_fun(lam, model, exps, grid), w, grid, cfg, project=project, record=True)
    dist = norm(r.values - w, exps, grid)
    interior = dist < delta * (1.0 - 1e-9) and r.converged
    if interior:
        msg = "interior stationary point"
    elif dist >= delta * (1.0 - 1e-9):
        msg = "boundary case, no interior local minimizer certified"
    else:
        msg = f"descent did not converge ({r.status})"
    return MinimizationResult(RadialFunction(grid, r.values), r.energy, r.residual, r.converged,
                              [(r.energy, dist, r.residual, r.iterations, r.status)], r.trace,
                              interior, msg, norm(r.values, exps, grid))


# ---------------------------------------------------------------------------
# Mountain pass
# ---------------------------------------------------------------------------

@dataclass
class MountainPassResult:
    c_lambda: float
    path: List[RadialFunction]
    critical_point: RadialFunction
    residual: float
    sigma: float
    rim_radius: float
    endpoint_energy: float
    iterations: int
    converged: bool
    trace: list = field(default_factory=list)   # (iteration, max energy, residual)


def rim_value(lam: float, radius: float, model: KirchhoffModel, exps: ProblemExponents,
              grid: RadialGrid, directions: Sequence[np.ndarray]) -> float:
    """Smallest energy over the given directions rescaled to ``||u|| = radius``."""
    fun = _energy_fun(lam, model, exps, grid)
    vals = []
    for d in directions:
        x = d * (radius / norm(d, exps, grid))
        vals.append(fun(x)[0])
    return float(min(vals))


def _rim_directions(endpoint: np.ndarray, grid: RadialGrid, exps, n_random: int, seed: int):
    rng = np.random.default_rng(seed)
    dirs = [endpoint]
    dirs += [u.values for u in random_bumps(grid, n_random // 2, rng)]
    eps = np.geomspace(1e-4, 1e-1, n_random - n_random // 2)
    dirs += [bubble(e, grid, exps).values for e in eps]
    return dirs


def _reparametrize(path: np.ndarray, exps, grid, keep: Optional[int] = None) -> np.ndarray:
    """Redistribute interior path nodes uniformly in ``||.||`` arc length.

    With ``keep`` the node of that index stays fixed and the two sub-paths on
    either side are redistributed separately.
    """
    def spread(seg):
        m = len(seg)
        if m < 3:
            return seg
        lens = np.array([norm(seg[i + 1] - seg[i], exps, grid) for i in range(m - 1)])
        s = np.concatenate([[0.0], np.cumsum(lens)])
        if s[-1] == 0:
            return seg
        target = np.linspace(0.0, s[-1], m)
        out = np.empty_like(seg)
        for j, st in enumerate(target):
            i = min(np.searchsorted(s, st, side="right") - 1, m - 2)
            w = (st - s[i]) / lens[i] if lens[i] > 0 else 0.0
            out[j] = (1 - w) * seg[i] + w * seg[i + 1]
        out[0], out[-1] = seg[0], seg[-1]
        return out

    if keep is None:
        return spread(path)
    left = spread(path[: keep + 1])
    right = spread(path[keep:])
    return np.vstack([left[:-1], right])


def mountain_pass(lam: float, endpoint: RadialFunction, model: KirchhoffModel,
                  exps: ProblemExponents, n_points: int = 32, tol: float = 1e-4,
                  max_iters: int = 5000, rim_fractions: Sequence[float] = (0.01, 0.02, 0.05, 0.1, 0.2),
                  n_directions: int = 64, seed: int = 42, climbing: bool = True,
                  step: float = 0.5) -> MountainPassResult:
    """Mountain-pass search on paths from 0 to ``endpoint``.

    The rim value ``sigma`` is the smallest energy over ``n_directions``
    directions scaled to ``||u|| = rho``; ``rho`` is the first of
    ``rim_fractions * ||endpoint||`` for which ``sigma`` exceeds both path end
    energies. Each iteration moves the highest interior node (with
    ``climbing``: down along the part of the gradient orthogonal to the path
    and up along the tangent), lets the other nodes descend orthogonally to the
    path, and redistributes the nodes by arc length. Stops once the highest
    node's residual is below ``tol * (1 + |c|)``.
    """
    grid = endpoint.grid
    fun = _energy_fun(lam, model, exps, grid)
    e_end = fun(endpoint.values)[0]
    e0 = 0.0
    n_end = norm(endpoint, exps)
    dirs = _rim_directions(endpoint.values, grid, exps, n_directions, seed)
    sigma, rho = -math.inf, None
    for frac in rim_fractions:
        sig = rim_value(lam, frac * n_end, model, exps, grid, dirs)
        if sig > max(e0, e_end):
            sigma, rho = sig, frac * n_end
            break
    if rho is None:
        raise GeometryError(f"no rim radius in {list(rim_fractions)} x ||endpoint|| has energy above "
                            f"max(Phi(0), Phi(endpoint)) = {max(e0, e_end):.3e}; check sigma and endpoint energy")

    ts = np.linspace(0.0, 1.0, n_points)
    path = ts[:, None] * endpoint.values[None, :]
    trace = []
    converged = False
    it = 0
    h = step
    prev_res = math.inf
    for it in range(1, max_iters + 1):
        evals, grads = zip(*(fun(x) for x in path))
        evals = np.array(evals)
        m = 1 + int(np.argmax(evals[1:-1]))
        c = float(evals[m])
        if c <= max(evals[0], evals[-1]):
            raise GeometryError("path collapse: the highest point is an endpoint; "
                                "geometry violated, check sigma and endpoint energy")
        sgs = [grid.sobolev_gradient(g) for g in grads]
        res = float(np.max(np.abs(sgs[m])))
        trace.append((it, c, res))
        if res <= tol * (1.0 + abs(c)):
            converged = True
            break
        if res > prev_res * 1.5:
            h *= 0.5
        prev_res = res
        new = path.copy()
        for j in range(1, n_points - 1):
            tau = path[j + 1] - path[j - 1]
            tn = grid.h1_inner(tau, tau)
            if tn == 0:
                continue
            along = grid.h1_inner(sgs[j], tau) / tn
            if climbing and j == m:
                d = sgs[j] - 2.0 * along * tau
            elif j == m:
                d = sgs[j]
            else:
                d = sgs[j] - along * tau
            new[j] = path[j] - h * d
        new[:, -1] = 0.0
        path = _reparametrize(new, exps, grid, keep=m if climbing else None)
    k = m
    return MountainPassResult(c, [RadialFunction(grid, x) for x in path],
                              RadialFunction(grid, path[k]), res, sigma, rho, e_end, it,
                              converged, trace)


# ---------------------------------------------------------------------------
# Nonexistence certification
# ---------------------------------------------------------------------------

@dataclass
class SampleCertificate:
    index: int
    passed: bool
    dpsi_positive: bool
    witness_t: Optional[float]      # a t with psi'(t) <= 0, if any
    final_norm: float
    final_energy: float
    status: str


@dataclass
class NonexistenceReport:
    lam: float
    passed: bool
    samples: List[SampleCertificate]
    norm_tol: float

    @property
    def failures(self) -> List[SampleCertificate]:
        return [s for s in self.samples if not s.passed]

    def to_dict(self) -> dict:
        return {"lambda": self.lam, "passed": self.passed, "norm_tol": self.norm_tol,
                "n_samples": len(self.samples), "n_failed": len(self.failures),
                "samples": [s.__dict__ for s in self.samples]}


def certify_nonexistence(lam: float, sample, model: KirchhoffModel, exps: ProblemExponents,
                         cfg: DescentConfig | None = None, norm_tol: float = 1e-4,
                         t_grid: np.ndarray | None = None) -> NonexistenceReport:
    """Check numerically that ``Phi_lambda`` has no nontrivial critical point.

    For every member ``u`` of ``sample`` (a sequence of functions or an object
    with a ``members`` attribute) two things are checked: ``psi'(t) > 0`` on a
    dense log grid of ``t``, and descent started from ``t1(u) u``, the point of
    the ray closest to criticality, ends at ``||u|| <= norm_tol``. A failure
    carries the witnessing ``t`` or the final norm and energy.
    """
    cfg = cfg or DescentConfig()
    members = getattr(sample, "members", sample)
    if len(members) == 0:
        raise ValueError("empty sample")
    if t_grid is None:
        t_grid = np.geomspace(T_LO, T_HI, T_POINTS)
    out = []
    for i, u in enumerate(members):
        grid = u.grid
        fc = FiberConstants.of(u, exps)
        with np.errstate(all="ignore"):
            dp = d_psi(fc, lam, t_grid, model, exps)
        bad = np.flatnonzero(~(dp > 0))
        witness = float(t_grid[bad[0]]) if bad.size else None
        try:
            t1 = lambda1_of_u(fc, model, exps).t
        except FiberError:
            t1 = 1.0
        r = descend(_energy_fun(lam, model, exps, grid), t1 * u.values, grid, cfg)
        nrm = norm(r.values, exps, grid)
        ok = witness is None and nrm <= norm_tol
        out.append(SampleCertificate(i, ok, witness is None, witness, nrm, r.energy, r.status))
        if not ok:
            log.info("sample %d fails at lambda=%g: witness t=%s, final norm %.3e, energy %.3e",
                     i, lam, witness, nrm, r.energy)
    return NonexistenceReport(lam, all(s.passed for s in out), out, norm_tol)
