"""One-dimensional minimization helpers shared by the model and fiber modules."""

import math
from typing import Callable, NamedTuple

import numpy as np

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI2 = (3.0 - math.sqrt(5.0)) / 2.0


def golden_section(f: Callable[[float], float], a: float, b: float,
                   xtol: float = 1e-12, max_iter: int = 500):
    """Golden-section search for a minimum of a unimodal ``f`` on ``[a, b]``.

    Stops once the bracket width is below ``xtol * (1 + |x|)``.
    Returns ``(x, f(x), iterations)``.
    """
    a, b = min(a, b), max(a, b)
    h = b - a
    c = a + INV_PHI2 * h
    d = a + INV_PHI * h
    fc, fd = f(c), f(d)
    it = 0
    while h > xtol * (1.0 + abs(0.5 * (a + b))) and it < max_iter:
        it += 1
        if fc < fd:
            b, d, fd = d, c, fc
            h = INV_PHI * h
            c = a + INV_PHI2 * h
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            h = INV_PHI * h
            d = a + INV_PHI * h
            fd = f(d)
    if fc < fd:
        return c, fc, it
    return d, fd, it


class ScanMinimum(NamedTuple):
    x: float             # argmin (in the original, not log, variable)
    value: float
    bracket: tuple       # (lo, hi) used for refinement
    iterations: int
    at_endpoint: bool    # grid minimum sat on the first or last node


def log_scan_minimize(f: Callable[[float], float], lo: float, hi: float,
                      npts: int = 4000, xtol: float = 1e-12,
                      refine_all: bool = False, tie_rtol: float = 1e-10,
                      vectorized: bool = False) -> ScanMinimum:
    """Minimize ``f`` over ``[lo, hi]`` by a log-spaced scan and golden refinement.

    The refinement runs in ``s = log x``. Non-finite values are dropped from the
    scan. ``vectorized`` means ``f`` accepts an array of abscissae. With
    ``refine_all`` every local grid minimum within ``tie_rtol`` of the best is
    refined and the smallest ``x`` among equal minima is returned.
    """
    s = np.linspace(math.log(lo), math.log(hi), npts)
    with np.errstate(all="ignore"):
        if vectorized:
            vals = np.asarray(f(np.exp(s)), dtype=float)
        else:
            vals = np.array([f(math.exp(si)) for si in s], dtype=float)
    finite = np.isfinite(vals)
    if not finite.any():
        raise FloatingPointError("no finite value on the scan grid")
    vals = np.where(finite, vals, np.inf)
    i_best = int(np.argmin(vals))
    at_end = i_best == 0 or i_best == npts - 1
    if at_end:
        return ScanMinimum(math.exp(s[i_best]), float(vals[i_best]),
                           (math.exp(s[i_best]), math.exp(s[i_best])), 0, True)

    g = lambda si: float(f(math.exp(si)))
    if refine_all:
        interior = np.arange(1, npts - 1)
        is_min = (vals[interior] <= vals[interior - 1]) & (vals[interior] <= vals[interior + 1])
        cand = interior[is_min]
        scale = max(abs(vals[i_best]), 1e-300)
        cand = cand[vals[cand] <= vals[i_best] + tie_rtol * scale + 1e-3 * scale]
    else:
        cand = np.array([i_best])

    results = []
    total_it = 0
    for i in cand:
        x, fx, it = golden_section(g, s[i - 1], s[i + 1], xtol=xtol)
        total_it += it
        results.append((x, fx, i))
    best_val = min(r[1] for r in results)
    scale = max(abs(best_val), 1e-300)
    ties = [r for r in results if r[1] <= best_val + tie_rtol * scale]
    x, fx, i = min(ties, key=lambda r: r[0])
    return ScanMinimum(math.exp(x), float(fx), (math.exp(s[i - 1]), math.exp(s[i + 1])),
                       total_it, False)
