"""Global minimizers across lambda0*, the local well just below it, a
mountain-pass point between 0 and that well, and the absence of nontrivial
critical points below lambda1*.

    python3 demos/03_minimizers_and_mountain_pass.py
"""

from pkirchhoff import (KirchhoffModel, ProblemExponents, RadialFunction, RadialGrid, TrialFamily,
                        certify_nonexistence, extremal_minimizer, lambda_star, minimize_global,
                        minimize_local, mountain_pass, norm)

exps = ProblemExponents(4, 2.0, 3.0)
model = KirchhoffModel(1.0, 1.0, 3.0)
grid = RadialGrid(4, 1.0, 201)
family = TrialFamily.default(grid, exps)
lam0 = lambda_star(0, family, model, exps).value
lam1 = lambda_star(1, family, model, exps).value
print(f"lambda1* ~ {lam1:.6f} < lambda0* ~ {lam0:.6f}\n")

print(" lam/lam0*   inf energy     ||u||")
for f in (0.5, 0.9, 0.999, 1.0, 1.1, 1.5):
    res = minimize_global(f * lam0, model, exps, grid)
    print(f"  {f:7.3f}  {res.energy: .6e}  {res.norm:.4f}")

est0 = lambda_star(0, family, model, exps)
w = RadialFunction(grid, extremal_minimizer(est0, model, exps).values)
lam = lam0 * (1 - 1e-3)
loc = minimize_local(lam, w, model, exps)
print(f"\njust below lambda0*: {loc.message}, energy {loc.energy:.4e}, ||u|| = {loc.norm:.4f}")

mp = mountain_pass(lam, w, model, exps)
print(f"mountain pass: rim value {mp.sigma:.4e} at radius {mp.rim_radius:.3f}, "
      f"level c = {mp.c_lambda:.6f}, residual {mp.residual:.1e} after {mp.iterations} iterations")
print(f"the pass point has ||u|| = {norm(mp.critical_point, exps):.4f}, "
      f"between 0 and the well at ||u|| = {norm(w, exps):.4f}")

sample = TrialFamily.bumps(grid, exps, 50, seed=1)
for lam in (0.0, 0.5 * lam1, 2.0 * lam0):
    rep = certify_nonexistence(lam, sample, model, exps)
    print(f"nonexistence at lambda = {lam:8.3f}: "
          f"{'certified' if rep.passed else f'fails on {len(rep.failures)} of 50 samples'}")
