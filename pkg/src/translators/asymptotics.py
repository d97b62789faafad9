"""Additive constants of the ends.

Each end of a rotationally symmetric translator is asymptotic to
V = r^2/(2(n-1)) - log r + C.  ``estimate_constant`` extracts C from a graph
profile by fitting C_est(r) = V - r^2/(2(n-1)) + log r with C + K/r.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import FitError, ReparametrizationError
from .profile_ode import GraphProfile, WingSolution, graph_view


@dataclass(frozen=True)
class AsymptoticFit:
    C: float
    K: float
    slope: float
    window: Tuple[float, float]
    points: int
    model_mismatch: bool = False

    def to_dict(self) -> dict:
        d = asdict(self)
        d["window"] = list(self.window)
        return d


def constant_estimate(g: GraphProfile, r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    return g.V_at(r) - r * r / (2 * (g.n - 1)) + np.log(r)


def _window_samples(g: GraphProfile, window, min_samples=8):
    """(r, C_est, C_est') on the window, read off the profile's own samples when there are enough."""
    a, b = window
    keep = (g.r_grid >= a) & (g.r_grid <= b)
    if keep.sum() >= min_samples:
        r, V, phi = g.r_grid[keep], g.V[keep], g.phi[keep]
    else:
        # sparse profile: fall back to interpolated points
        r = np.geomspace(a, b, 200)
        V, phi = g.V_at(r), g.phi_at(r)
    c = V - r * r / (2 * (g.n - 1)) + np.log(r)
    dc = phi - r / (g.n - 1) + 1.0 / r
    return r, c, dc


def _loglog_slope(r, y) -> float:
    y = np.abs(y)
    ok = y > 0
    if ok.sum() < 2:
        return -math.inf
    return float(np.polyfit(np.log(r[ok]), np.log(y[ok]), 1)[0])


def estimate_constant(
    g: GraphProfile,
    window: Tuple[float, float],
    R_star: Optional[float] = None,
    min_decades: float = 1.0,
) -> AsymptoticFit:
    """Fit C + K/r to C_est on the profile's own samples inside ``window``.

    ``R_star`` (default: first radius of ``g``) sets the admissible start
    10 (R* + 1).  ``slope`` is the log-log regression exponent of
    |C_est - C|.  ``model_mismatch`` flags a C_est that does not settle:
    either that slope is non-negative or C_est' = phi - r/(n-1) + 1/r decays
    no faster than 1/r, which is what a profile of another dimension gives.
    """
    a, b = map(float, window)
    R_star = g.r_lo if R_star is None else R_star
    if not (a > 0 and b > a):
        raise FitError(f"bad window {window}")
    if a < g.r_lo or b > g.r_hi * (1 + 1e-12):
        raise FitError(f"window {window} outside profile extent [{g.r_lo}, {g.r_hi}]")
    if a < 10 * (R_star + 1) * (1 - 1e-12):
        raise FitError(f"window must start at r >= 10 (R* + 1) = {10 * (R_star + 1)}")
    if math.log10(b / a) < min_decades - 1e-12:
        raise FitError(f"window spans {math.log10(b / a):.3f} decades, need {min_decades}")
    r, c, dc = _window_samples(g, (a, b))
    A = np.column_stack([np.ones_like(r), 1.0 / r])
    (C, K), *_ = np.linalg.lstsq(A, c, rcond=None)
    slope = _loglog_slope(r, c - C)
    if not math.isfinite(slope):
        raise FitError("remainder vanishes identically; slope undefined")
    mismatch = slope >= 0 or _loglog_slope(r, dc) >= -1.0
    return AsymptoticFit(float(C), float(K), slope, (a, b), int(r.size), bool(mismatch))


def end_graphs(w: WingSolution) -> Tuple[GraphProfile, GraphProfile]:
    """(upper, lower) ends as graphs; the lower one starts at the turning radius."""
    up = w.upper
    start = float(up.r[np.argmax(np.cos(up.alpha) > 1e-6)])
    return graph_view(up, start), graph_view(w.lower, w.R_star)


def end_separation(w, window: Tuple[float, float], min_decades: float = 1.0):
    """(C_plus, C_minus, C_plus - C_minus) of a wing; C_minus uses V(R*) = -d."""
    if not isinstance(w, WingSolution):
        raise FitError("end separation needs a two-ended wing; the bowl has a single end")
    try:
        up, lo = end_graphs(w)
    except ReparametrizationError as exc:
        raise FitError(str(exc)) from exc
    fp = estimate_constant(up, window, R_star=w.R_star, min_decades=min_decades)
    fm = estimate_constant(lo, window, R_star=w.R_star, min_decades=min_decades)
    return fp.C, fm.C, fp.C - fm.C
