"""Fibers of the energy and the extremal parameters.

Along the ray t -> t u the energy depends on u through three numbers only, so
lambda0(u) and lambda1(u) are one-dimensional minimizations. Their infima over
u are estimated twice: by minimizing over a trial family (then refining by
descent on the unit sphere) and by bisection on the sign of the global energy
minimum.

    python3 demos/02_fibers_and_extremal.py
"""

import numpy as np

from pkirchhoff import (FiberConstants, KirchhoffModel, ProblemExponents, RadialGrid, TrialFamily,
                        bubble, lambda0_star_by_bisection, lambda_star, solve_fiber)
from pkirchhoff.fiber import psi

exps = ProblemExponents(4, 2.0, 3.0)
model = KirchhoffModel(1.0, 1.0, 3.0)
grid = RadialGrid(4, 1.0, 201)

u = bubble(1e-2, grid, exps)
fc = FiberConstants.of(u, exps)
sol = solve_fiber(fc, model, exps)
print(f"bubble eps=1e-2: lambda0 = {sol.lambda0:.6f} at t0 = {sol.t0:.6f}")
print(f"                 lambda1 = {sol.lambda1:.6f} at t1 = {sol.t1:.6f}")

# At lam = lambda0(u) the fiber touches zero from above at t0.
t = np.geomspace(0.05 * sol.t0, 5 * sol.t0, 9)
print("\n  t/t0      psi(t) at lambda0(u)")
for ti, v in zip(t / sol.t0, psi(fc, sol.lambda0, t, model, exps)):
    print(f"  {ti:6.3f}  {v: .3e}")

family = TrialFamily.default(grid, exps, seed=42)
est0 = lambda_star(0, family, model, exps)
est1 = lambda_star(1, family, model, exps)
print(f"\nbest of {len(family)} trial functions: lambda0 = {est0.diagnostics['family_min']:.4f}"
      f" ({est0.diagnostics['best_member']})")
print(f"after refinement: lambda0* ~ {est0.value:.8f}, lambda1* ~ {est1.value:.8f}")

bis = lambda0_star_by_bisection(model, exps, grid)
lo, hi = bis.diagnostics["bracket"]
print(f"energy-sign bisection: lambda0* in [{lo:.4f}, {hi:.4f}]"
      f" ({len(bis.diagnostics['evaluations'])} global minimizations)")
print(f"relative disagreement {abs(bis.value - est0.value) / est0.value:.2e}")
