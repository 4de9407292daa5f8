"""Which Kirchhoff coefficients M(t) = a + b t^(alpha-1) satisfy the hypotheses?

For alpha above N/(N-p) the answer is a closed-form threshold on a^e b. This
script prints the thresholds for the default problem, checks them against a
brute-force scan of inf Mhat(t)/t^(p*/p), and walks b across the threshold.

    python3 demos/01_hypotheses.py
"""

import numpy as np

from pkirchhoff import KirchhoffModel, ProblemExponents, check_hypotheses, inf_mhat_ratio, thresholds

exps = ProblemExponents(N=4, p=2.0, q=3.0)
print(f"N=4, p=2: p* = {exps.pstar:g}, S = {exps.S:.12f}")

base = KirchhoffModel(a=1.0, b=1.0, alpha=3.0)
thr_i, thr_ii, lhs = thresholds(base, exps)
print(f"threshold for beta1  = {thr_i:.6e}")
print(f"threshold for gamma1 = {thr_ii:.6e}")
print(f"a^e b at a = b = 1   = {lhs:g}  -> both hold by a wide margin\n")

# Walk b through both thresholds; the scan oracle must switch at the first.
crit = exps.p / exps.pstar * exps.S
print(f"{'b':>12} {'scan inf':>14} {'(p/p*)S':>12} beta1 gamma1")
for b in np.geomspace(0.5 * thr_i, 2.0 * thr_ii, 7):
    m = KirchhoffModel(1.0, b, 3.0)
    rep = check_hypotheses(m, exps)
    print(f"{b:12.4e} {inf_mhat_ratio(m, exps).value:14.6e} {crit:12.6e} "
          f"{rep.beta1!s:>5} {rep.gamma1!s:>6}")

# At alpha = p*/p the infimum is b/alpha exactly; below it the infimum is 0.
for alpha in (2.0, 1.5):
    m = KirchhoffModel(1.0, 0.7, alpha)
    rep = check_hypotheses(m, exps)
    print(f"\nalpha = {alpha}: scan inf = {inf_mhat_ratio(m, exps).value:.8f}; {rep.branch}")
