"""How truncated bubbles approach the Sobolev level.

The unnormalized bubble's gradient energy blows up like eps^(-(N-p)/p); after
normalization its critical norm climbs to S. The gap closes at the rate
eps^((N-p)/p), set by the O(1) correction of the gradient energy.

    python3 demos/04_bubbles.py
"""

import numpy as np

from pkirchhoff import KirchhoffModel, ProblemExponents, RadialGrid, bubble_asymptotics, thresholds
from pkirchhoff.extremal import bubble_curve

exps = ProblemExponents(4, 2.0, 3.0)
eps = np.geomspace(1e-5, 1e-1, 9)
grid = RadialGrid(4, 1.0, 100001)     # resolves the core radius eps^(1/2)
ba = bubble_asymptotics(eps, grid, exps)

print("      eps      ||v||^p     ||u||_4^4       S - ||u||_4^4")
for row in zip(ba.eps, ba.grad_p, ba.crit, ba.gap):
    print("  {:.1e}  {:11.4e}  {:.10f}  {:.4e}".format(*row))
print(f"gradient slope {ba.grad_slope:.4f}, gap exponent {ba.gap_exponent:.4f}")
local = np.diff(np.log(ba.gap)) / np.diff(np.log(ba.eps))
print("local gap exponents:", np.round(local, 4))

# Tuning b onto the beta1 threshold pushes lambda0 along the bubbles to 0.
thr_i, _, _ = thresholds(KirchhoffModel(1.0, 1.0, 3.0), exps)
model = KirchhoffModel(1.0, thr_i, 3.0)
print("\nb at the beta1 threshold:")
for e, l0, _ in bubble_curve([1e-2, 1e-3, 1e-4, 1e-5], RadialGrid(4, 1.0, 20001), model, exps):
    print(f"  eps = {e:.0e}: lambda0(u_eps) = {l0:.5f}")
