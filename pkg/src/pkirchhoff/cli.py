"""Command-line front end.

Usage::

    python3 -m pkirchhoff <subcommand> [--config run.json] [--N 4 --p 2 ...] --out DIR

Every run writes ``report.json`` into ``--out`` and, depending on the
subcommand, ``fiber.csv``, ``profile.csv`` and ``trace.csv``. Each CSV starts
with a ``#`` line carrying the SHA-256 hash of the resolved configuration.

Exit status: 0 success, 1 numerical failure, 2 a required hypothesis fails,
64 usage error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .discretization import RadialFunction, RadialGrid, bubble, bubble_asymptotics
from .extremal import (TrialFamily, bubble_curve, bubble_curve_csv, extremal_minimizer,
                       extremal_report, lambda0_star_by_bisection, lambda_star)
from .fiber import (T_HI, T_LO, FiberConstants, FiberError, fiber_profile_csv, solve_fiber,
                    system_residuals)
from .model import (KirchhoffModel, ProblemExponents, check_hypotheses, comparison_cp,
                    inf_m_ratio, inf_mhat_ratio)
from .solver import (DescentConfig, DivergenceError, GeometryError, certify_nonexistence,
                     minimize_global, minimize_local, mountain_pass, norm)

EXIT_OK, EXIT_NUMERICAL, EXIT_HYPOTHESIS, EXIT_USAGE = 0, 1, 2, 64

log = logging.getLogger("pkirchhoff")

DEFAULTS = {"N": 4, "p": 2.0, "q": 3.0, "a": 1.0, "b": 1.0, "alpha": 3.0, "R": 1.0,
            "grid_n": 201, "seed": 42, "lambda": None}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    N: int = 4
    p: float = 2.0
    q: float = 3.0
    a: float = 1.0
    b: float = 1.0
    alpha: float = 3.0
    R: float = 1.0
    grid_n: int = 201
    seed: int = 42
    lam: Optional[float] = None
    options: dict = field(default_factory=dict)

    def validate(self):
        if int(self.N) != self.N or self.N < 2:
            raise UsageError(f"--N must be an integer >= 2, got {self.N}")
        if not 1 < self.p < self.N:
            raise UsageError(f"need 1 < p < N, got p={self.p}, N={self.N}")
        pstar = self.p * self.N / (self.N - self.p)
        if not self.p < self.q < pstar:
            raise UsageError(f"need p < q < p* = {pstar:g}, got q={self.q}")
        if not self.alpha > 1:
            raise UsageError(f"need alpha > 1, got alpha={self.alpha}")
        if not (self.a > 0 and self.b > 0):
            raise UsageError(f"need a > 0 and b > 0, got a={self.a}, b={self.b}")
        if self.grid_n < 16:
            raise UsageError(f"--grid-n must be >= 16, got {self.grid_n}")
        if not self.R > 0:
            raise UsageError("R must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise UsageError("seed must be a 64-bit unsigned integer")

    def digest(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()

    @property
    def exps(self) -> ProblemExponents:
        return ProblemExponents(int(self.N), self.p, self.q)

    @property
    def model(self) -> KirchhoffModel:
        return KirchhoffModel(self.a, self.b, self.alpha)

    @property
    def grid(self) -> RadialGrid:
        return RadialGrid(int(self.N), self.R, int(self.grid_n))


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(sp: argparse.ArgumentParser):
    g = sp.add_argument_group("problem")
    g.add_argument("--config", type=Path, help="JSON file with any of the flag values")
    g.add_argument("--N", type=int)
    g.add_argument("--p", type=float)
    g.add_argument("--q", type=float)
    g.add_argument("--a", type=float)
    g.add_argument("--b", type=float)
    g.add_argument("--alpha", type=float)
    g.add_argument("--R", type=float)
    g.add_argument("--lambda", dest="lam", type=float)
    g.add_argument("--grid-n", dest="grid_n", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--out", type=Path, default=Path("."), help="output directory")
    g.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="pkirchhoff", description="p-Kirchhoff critical-exponent laboratory")
    sub = ap.add_subparsers(dest="command", metavar="subcommand", parser_class=_Parser)
    sub.required = True

    sp = sub.add_parser("check", help="hypothesis report")
    _common(sp)

    for name, hlp in (("fiber", "psi, psi', Lambda, Theta along the ray of a trial u"),
                      ("lambda0", "lambda0(u), t0(u) of a trial u"),
                      ("lambda1", "lambda1(u), t1(u) of a trial u")):
        sp = sub.add_parser(name, help=hlp)
        _common(sp)
        sp.add_argument("--eps", type=float, help="bubble parameter of the trial u (default 1e-2)")
        sp.add_argument("--profile", type=Path, help="trial u as an r,u CSV instead of a bubble")
        if name == "fiber":
            sp.add_argument("--points", type=int, help="t samples (default 400)")

    sp = sub.add_parser("extremal", help="lambda0*, lambda1* by quotient minimization and bisection")
    _common(sp)
    sp.add_argument("--no-bisection", dest="bisection", action="store_false", default=None)
    sp.add_argument("--lam-max", dest="lam_max", type=float)

    sp = sub.add_parser("minimize", help="global or local minimization of Phi_lambda")
    _common(sp)
    sp.add_argument("--lambda-factor", dest="lambda_factor", type=float,
                    help="lambda as a multiple of the estimated lambda0*")
    sp.add_argument("--local", action="store_true", default=None,
                    help="local minimization warm-started at the lambda0* minimizer")
    sp.add_argument("--delta", type=float, help="trust-ball radius as a fraction of ||warm start||")

    sp = sub.add_parser("mpa", help="mountain-pass search from 0 to the lambda0* minimizer")
    _common(sp)
    sp.add_argument("--lambda-factor", dest="lambda_factor", type=float,
                    help="lambda as a multiple of lambda0* (default 0.999)")
    sp.add_argument("--points", type=int, help="path nodes (default 32)")

    sp = sub.add_parser("nonexist", help="certify that only u = 0 is critical")
    _common(sp)
    sp.add_argument("--lambda-factor", dest="lambda_factor", type=float,
                    help="lambda as a multiple of lambda1* (default 0.5)")
    sp.add_argument("--samples", type=int, help="sample size (default 50)")

    sp = sub.add_parser("bubbles", help="eps-asymptotics of truncated bubbles")
    _common(sp)
    sp.add_argument("--eps-min", dest="eps_min", type=float)
    sp.add_argument("--eps-max", dest="eps_max", type=float)
    sp.add_argument("--eps-count", dest="eps_count", type=int)
    sp.add_argument("--bubble-n", dest="bubble_n", type=int, help="fine grid size (default 20001)")
    return ap


PROBLEM_KEYS = ("N", "p", "q", "a", "b", "alpha", "R", "grid_n", "seed", "lam")


def resolve_config(ns: argparse.Namespace) -> RunConfig:
    """Defaults, then the JSON config file, then explicit flags."""
    merged = {k: v for k, v in DEFAULTS.items()}
    merged["lam"] = merged.pop("lambda")
    options = {}
    if ns.config is not None:
        try:
            data = json.loads(Path(ns.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {ns.config}: {exc}")
        if not isinstance(data, dict):
            raise UsageError("config must be a JSON object")
        for k, v in data.items():
            key = {"lambda": "lam", "grid-n": "grid_n"}.get(k, k.replace("-", "_"))
            if key in PROBLEM_KEYS:
                merged[key] = v
            else:
                options[key] = v
    skip = {"config", "out", "verbose", "command"}
    for k, v in vars(ns).items():
        if k in skip or v is None:
            continue
        if k in PROBLEM_KEYS:
            merged[k] = v
        else:
            options[k] = v
    if isinstance(options.get("profile"), Path):
        options["profile"] = str(options["profile"])
    try:
        cfg = RunConfig(N=int(merged["N"]), p=float(merged["p"]), q=float(merged["q"]),
                        a=float(merged["a"]), b=float(merged["b"]), alpha=float(merged["alpha"]),
                        R=float(merged["R"]), grid_n=int(merged["grid_n"]), seed=int(merged["seed"]),
                        lam=None if merged["lam"] is None else float(merged["lam"]),
                        options=options)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid config value: {exc}")
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    return x


class Output:
    def __init__(self, cfg: RunConfig, directory: Path, command: str):
        self.cfg = cfg
        self.dir = Path(directory)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.command = command
        self.hash = cfg.digest()

    @property
    def comment(self) -> str:
        return f"config sha256={self.hash}"

    def write(self, name: str, text: str):
        (self.dir / name).write_text(text)

    def report(self, body: dict, status: str):
        doc = {"command": self.command, "status": status, "config": asdict(self.cfg),
               "config_sha256": self.hash, "result": body}
        self.write("report.json", json.dumps(_jsonable(doc), sort_keys=True, indent=2) + "\n")

    def trace(self, rows, columns=("iteration", "energy", "residual")):
        buf = io.StringIO()
        buf.write(f"# {self.comment}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([str(int(row[0]))] + [f"{float(x):.16e}" for x in row[1:]])
        self.write("trace.csv", buf.getvalue())

    def profile(self, u: RadialFunction):
        self.write("profile.csv", u.to_csv(self.comment))


class HypothesisFailure(Exception):
    def __init__(self, report, needed):
        self.report, self.needed = report, needed
        super().__init__(f"required hypotheses fail: {', '.join(needed)}")


def _require(cfg: RunConfig, *names):
    rep = check_hypotheses(cfg.model, cfg.exps)
    bad = [n for n in names if not getattr(rep, n)]
    if bad:
        raise HypothesisFailure(rep, bad)
    return rep


def _trial(cfg: RunConfig) -> tuple:
    opts = cfg.options
    if opts.get("profile"):
        u = RadialFunction.from_csv(Path(opts["profile"]).read_text(), int(cfg.N))
        return u, f"profile:{opts['profile']}"
    eps = float(opts.get("eps", 1e-2))
    return bubble(eps, cfg.grid, cfg.exps), f"bubble(eps={eps:g})"


def _descent_cfg(cfg: RunConfig) -> DescentConfig:
    return DescentConfig(seed=cfg.seed)


def _lambda0_star(cfg: RunConfig):
    fam = TrialFamily.default(cfg.grid, cfg.exps, seed=cfg.seed)
    return lambda_star(0, fam, cfg.model, cfg.exps), fam


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_check(cfg: RunConfig, out: Output) -> int:
    rep = check_hypotheses(cfg.model, cfg.exps)
    body = rep.to_dict()
    body["all_hold"] = rep.all_hold
    body["failed"] = rep.failed()
    body["S"] = cfg.exps.S
    body["scan_inf_mhat_ratio"] = inf_mhat_ratio(cfg.model, cfg.exps)._asdict()
    body["scan_inf_m_ratio"] = inf_m_ratio(cfg.model, cfg.exps)._asdict()
    body["critical_level"] = cfg.exps.p / cfg.exps.pstar * cfg.exps.S
    cp = comparison_cp(cfg.exps)
    body["comparison_cp"] = cp.c_p
    body["comparison_ratio"] = cp.ratio
    out.report(body, "ok" if rep.all_hold else "hypothesis_failure")
    return EXIT_OK if rep.all_hold else EXIT_HYPOTHESIS


def _per_function(cfg: RunConfig, out: Output, with_profile: bool) -> tuple:
    _require(cfg, "rho2")
    u, label = _trial(cfg)
    fc = FiberConstants.of(u, cfg.exps)
    sol = solve_fiber(fc, cfg.model, cfg.exps)
    body = {"trial": label, "A": fc.A, "B": fc.B, "C": fc.C,
            "lambda0": sol.lambda0, "t0": sol.t0, "lambda1": sol.lambda1, "t1": sol.t1,
            "ordering_holds": sol.lambda1 < sol.lambda0,
            "residuals_level0": system_residuals(fc, sol.lambda0, sol.t0, cfg.model, cfg.exps, 0),
            "residuals_level1": system_residuals(fc, sol.lambda1, sol.t1, cfg.model, cfg.exps, 1)}
    if with_profile:
        out.profile(u)
    return u, fc, sol, body


def cmd_fiber(cfg: RunConfig, out: Output) -> int:
    u, fc, sol, body = _per_function(cfg, out, True)
    lam = cfg.lam if cfg.lam is not None else sol.lambda0
    npts = int(cfg.options.get("points", 400))
    t = np.concatenate([[0.0], np.geomspace(T_LO, T_HI, npts)])
    out.write("fiber.csv", fiber_profile_csv(fc, lam, t, cfg.model, cfg.exps, out.comment))
    body["lambda"] = lam
    out.report(body, "ok")
    return EXIT_OK


def cmd_lambda(cfg: RunConfig, out: Output, level: int) -> int:
    _, _, sol, body = _per_function(cfg, out, True)
    body["level"] = level
    body["value"] = sol.lambda0 if level == 0 else sol.lambda1
    out.report(body, "ok")
    return EXIT_OK


def cmd_extremal(cfg: RunConfig, out: Output) -> int:
    rep = _require(cfg, "beta1")
    est0, fam = _lambda0_star(cfg)
    est1 = lambda_star(1, fam, cfg.model, cfg.exps) if rep.gamma1 else None
    bis = None
    if cfg.options.get("bisection", True):
        bis = lambda0_star_by_bisection(cfg.model, cfg.exps, cfg.grid,
                                        lam_max=float(cfg.options.get("lam_max", 1e3)),
                                        cfg=_descent_cfg(cfg))
    body = extremal_report(est0, est1, bis)
    if est1 is None:
        body["lambda1_star_skipped"] = "gamma1 fails"
    if bis is not None:
        body["agreement_1pct"] = body["relative_disagreement"] <= 1e-2
        body["bisection_lower_bound_only"] = bis.diagnostics["lower_bound_only"]
    out.profile(est0.argmin)
    out.trace(est0.diagnostics.get("refine_trace", []), ("iteration", "lambda0", "residual"))
    eps = [float(e) for e in np.geomspace(1e-5, 1e-1, 12)]
    out.write("fiber.csv", bubble_curve_csv(bubble_curve(eps, cfg.grid, cfg.model, cfg.exps),
                                            out.comment))
    out.report(body, "ok")
    return EXIT_OK


def cmd_minimize(cfg: RunConfig, out: Output) -> int:
    _require(cfg, "beta1", "beta2")
    dcfg = _descent_cfg(cfg)
    lam = cfg.lam
    est0 = None
    factor = cfg.options.get("lambda_factor")
    if lam is None or factor is not None or cfg.options.get("local"):
        est0, _ = _lambda0_star(cfg)
    if lam is None:
        lam = float(factor if factor is not None else 1.0) * est0.value
    elif factor is not None:
        raise UsageError("give either --lambda or --lambda-factor")
    body = {"lambda": lam}
    if est0 is not None:
        body["lambda0_star"] = est0.value
    if cfg.options.get("local"):
        warm = extremal_minimizer(est0, cfg.model, cfg.exps, dcfg)
        w = RadialFunction(cfg.grid, warm.values)
        delta = float(cfg.options.get("delta", 0.2)) * norm(w, cfg.exps)
        res = minimize_local(lam, w, cfg.model, cfg.exps, delta, dcfg)
        body.update(mode="local", delta=delta, interior=res.interior, message=res.message,
                    warm_start_norm=norm(w, cfg.exps))
    else:
        res = minimize_global(lam, cfg.model, cfg.exps, cfg.grid, dcfg,
                              extra_starts=[est0.argmin] if est0 is not None else ())
        body.update(mode="global",
                    runs=[dict(zip(("energy", "norm", "residual", "iterations", "status"), r))
                          for r in res.runs])
    body.update(energy=res.energy, norm=res.norm, residual=res.residual, converged=res.converged)
    out.profile(res.u)
    out.trace(res.trace)
    out.report(body, "ok" if res.converged else "not_converged")
    return EXIT_OK if res.converged else EXIT_NUMERICAL


def cmd_mpa(cfg: RunConfig, out: Output) -> int:
    _require(cfg, "beta1", "gamma1")
    dcfg = _descent_cfg(cfg)
    est0, _ = _lambda0_star(cfg)
    factor = cfg.options.get("lambda_factor")
    if cfg.lam is not None and factor is not None:
        raise UsageError("give either --lambda or --lambda-factor")
    lam = cfg.lam if cfg.lam is not None else float(factor or 0.999) * est0.value
    end = extremal_minimizer(est0, cfg.model, cfg.exps, dcfg)
    endpoint = RadialFunction(cfg.grid, end.values)
    mp = mountain_pass(lam, endpoint, cfg.model, cfg.exps,
                       n_points=int(cfg.options.get("points", 32)), seed=cfg.seed)
    geometry = mp.c_lambda >= mp.sigma > max(0.0, mp.endpoint_energy)
    body = {"lambda": lam, "lambda0_star": est0.value, "c_lambda": mp.c_lambda,
            "sigma": mp.sigma, "rim_radius": mp.rim_radius, "endpoint_energy": mp.endpoint_energy,
            "endpoint_norm": norm(endpoint, cfg.exps), "residual": mp.residual,
            "residual_tol": 1e-4 * (1.0 + abs(mp.c_lambda)), "iterations": mp.iterations,
            "converged": mp.converged, "geometry_holds": geometry,
            "critical_point_norm": norm(mp.critical_point, cfg.exps)}
    out.profile(mp.critical_point)
    out.trace(mp.trace, ("iteration", "max_energy", "residual"))
    ok = mp.converged and geometry
    out.report(body, "ok" if ok else "not_converged")
    return EXIT_OK if ok else EXIT_NUMERICAL


def cmd_nonexist(cfg: RunConfig, out: Output) -> int:
    _require(cfg, "gamma1")
    factor = cfg.options.get("lambda_factor")
    if cfg.lam is not None and factor is not None:
        raise UsageError("give either --lambda or --lambda-factor")
    body = {}
    if cfg.lam is not None:
        lam = cfg.lam
    else:
        fam = TrialFamily.default(cfg.grid, cfg.exps, seed=cfg.seed)
        est1 = lambda_star(1, fam, cfg.model, cfg.exps)
        lam = float(0.5 if factor is None else factor) * est1.value
        body["lambda1_star"] = est1.value
    sample = TrialFamily.bumps(cfg.grid, cfg.exps, int(cfg.options.get("samples", 50)),
                               seed=cfg.seed + 1)
    rep = certify_nonexistence(lam, sample, cfg.model, cfg.exps, _descent_cfg(cfg))
    body.update(rep.to_dict())
    out.report(body, "certified" if rep.passed else "not_certified")
    return EXIT_OK


def cmd_bubbles(cfg: RunConfig, out: Output) -> int:
    o = cfg.options
    eps = np.geomspace(float(o.get("eps_min", 1e-4)), float(o.get("eps_max", 1e-2)),
                       int(o.get("eps_count", 5)))
    grid = RadialGrid(int(cfg.N), cfg.R, int(o.get("bubble_n", 20001)))
    ba = bubble_asymptotics(eps, grid, cfg.exps)
    N, p = cfg.exps.N, cfg.exps.p
    body = {"eps": ba.eps, "grad_p": ba.grad_p, "crit": ba.crit, "gap": ba.gap,
            "S": cfg.exps.S, "grad_slope": ba.grad_slope,
            "grad_slope_expected": -(N - p) / p, "gap_exponent": ba.gap_exponent,
            "max_quotient_over_S": ba.max_quotient, "grid_n": grid.n}
    buf = io.StringIO()
    buf.write(f"# {out.comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["eps", "grad_p", "crit", "gap"])
    for row in zip(ba.eps, ba.grad_p, ba.crit, ba.gap):
        w.writerow([f"{x:.16e}" for x in row])
    out.write("trace.csv", buf.getvalue())
    out.report(body, "ok")
    return EXIT_OK


COMMANDS = {"check": cmd_check, "fiber": cmd_fiber,
            "lambda0": lambda c, o: cmd_lambda(c, o, 0), "lambda1": lambda c, o: cmd_lambda(c, o, 1),
            "extremal": cmd_extremal, "minimize": cmd_minimize, "mpa": cmd_mpa,
            "nonexist": cmd_nonexist, "bubbles": cmd_bubbles}


def main(argv=None) -> int:
    ap = build_parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(ns)
    except UsageError as exc:
        ap.print_usage(sys.stderr)
        print(f"pkirchhoff: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out = Output(cfg, ns.out, ns.command)
    try:
        return COMMANDS[ns.command](cfg, out)
    except UsageError as exc:
        print(f"pkirchhoff: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HypothesisFailure as exc:
        body = exc.report.to_dict()
        body["required"] = exc.needed
        out.report(body, "hypothesis_failure")
        print(f"pkirchhoff: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (FiberError, DivergenceError, GeometryError, FloatingPointError, ValueError) as exc:
        out.report({"error": type(exc).__name__, "message": str(exc)}, "numerical_failure")
        print(f"pkirchhoff: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
