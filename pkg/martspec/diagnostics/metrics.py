"""
Module for distances between distribution functions.

Both distances accept step distribution functions (StepCDF) and limit laws
(SmoothCDF). Each input exposes F(t), F(t-) and its breakpoints; smooth
inputs additionally contribute an evenly spaced grid over their support.
Between breakpoints a step function is constant and a smooth one monotone,
so checking right values and left limits at the breakpoints is exact when at
least one input is a step function.
"""

from __future__ import annotations

from typing import Any

import numpy as np

from ..spectra import StepCDF

LEVY_TOL = 1e-6
SMOOTH_GRID_POINTS = 4001

# slack on the sandwich inequality for floating-point comparisons
_SANDWICH_SLACK = 1e-12


def candidate_points(F: Any, G: Any) -> np.ndarray:
    """Merged breakpoints of F and G, plus a support grid for smooth inputs."""
    pts = [np.asarray(F.breakpoints()), np.asarray(G.breakpoints())]
    smooth = [H for H in (F, G) if not isinstance(H, StepCDF)]
    if smooth:
        lo = min(min(H.support[0] for H in (F, G)), 0.0)
        hi = max(max(H.support[1] for H in (F, G)), 0.0)
        pts.append(np.linspace(lo, hi, SMOOTH_GRID_POINTS))
    return np.unique(np.concatenate(pts))


def kolmogorov_distance(F: Any, G: Any) -> float:
    """sup_t |F(t) - G(t)|, scanning right values and left limits."""
    t = candidate_points(F, G)
    right = np.abs(np.asarray(F(t)) - np.asarray(G(t)))
    left = np.abs(np.asarray(F.left_limit(t)) - np.asarray(G.left_limit(t)))
    return float(max(right.max(), left.max()))


def levy_distance(F: Any, G: Any, tol: float = LEVY_TOL) -> float:
    """
    inf{eps > 0 : F(x - eps) - eps <= G(x) <= F(x + eps) + eps for all x},
    by bisection on eps over [0, 1] (eps = 1 is always feasible), to
    absolute accuracy tol.
    """
    base = candidate_points(F, G)
    if _sandwich_holds(F, G, base, 0.0):
        return 0.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol / 2:
        mid = (lo + hi) / 2
        if _sandwich_holds(F, G, base, mid):
            hi = mid
        else:
            lo = mid
    return hi


def _sandwich_holds(F: Any, G: Any, base: np.ndarray, eps: float) -> bool:
    x = np.unique(np.concatenate([base, base - eps, base + eps]))
    slack = eps + _SANDWICH_SLACK
    g_right, g_left = np.asarray(G(x)), np.asarray(G.left_limit(x))
    if np.any(np.asarray(F(x - eps)) - slack > g_right):
        return False
    if np.any(np.asarray(F.left_limit(x - eps)) - slack > g_left):
        return False
    if np.any(g_right > np.asarray(F(x + eps)) + slack):
        return False
    if np.any(g_left > np.asarray(F.left_limit(x + eps)) + slack):
        return False
    return True
