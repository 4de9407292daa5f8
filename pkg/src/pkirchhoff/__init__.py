"""Numerical laboratory for the p-Kirchhoff problem with critical Sobolev exponent.

Radial discretization of the energy

    Phi_lam(u) = Mhat(||u||^p)/p - ||u||_{p*}^{p*}/p* - lam int F(u)

on a ball, fiber-map parameters ``lambda0(u)``, ``lambda1(u)``, their extremal
values, minimizers, mountain-pass levels and nonexistence checks.
"""

from .discretization import (RadialFunction, RadialGrid, bubble, bubble_asymptotics, energy,
                             energy_gradient, grad_norm_p, lebesgue_norm)
from .extremal import (ExtremalEstimate, TrialFamily, extremal_minimizer,
                       lambda0_star_by_bisection, lambda_star)
from .fiber import (FiberConstants, FiberError, lambda0_of_u, lambda1_of_u, solve_fiber,
                    system_residuals)
from .model import (HypothesisReport, KirchhoffModel, ProblemExponents, check_hypotheses,
                    comparison_cp, inf_m_ratio, inf_mhat_ratio, sobolev_constant, thresholds)
from .solver import (DescentConfig, DivergenceError, GeometryError, MountainPassResult,
                     certify_nonexistence, minimize_global, minimize_local, mountain_pass, norm)

__version__ = "0.1.0"
