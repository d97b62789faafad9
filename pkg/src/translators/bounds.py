"""Pointwise verification of the a-priori estimates for winglike solutions.

Every check evaluates both sides of one inequality on a radius grid and
records the smallest signed margin (positive means the inequality holds).
Lower-branch estimates live on the graph part r >= R* of the lower branch,
where phi(R*) = 0, and heights there are measured from the turning point,
i.e. V_rel(r) = V(r) + d.
"""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass
from typing import Callable, List, Optional, Tuple, Union

import numpy as np

from .errors import DomainError, RangeError
from .profile_ode import GraphProfile, WingSolution, graph_view

DEFAULT_TOLERANCE = 1e-7
IDENTITY_TOLERANCE = 1e-6


class BoundId(enum.Enum):
    PHI_ENVELOPE = "PHI_ENVELOPE"
    MONOTONICITY_IDENTITY = "MONOTONICITY_IDENTITY"
    CAUCHY_SCHWARZ = "CAUCHY_SCHWARZ"
    FIRST_LOWER = "FIRST_LOWER"
    BETA_LOG_LOWER = "BETA_LOG_LOWER"
    REFINED_LOWER = "REFINED_LOWER"
    V_QUADRATIC_LOWER = "V_QUADRATIC_LOWER"
    V_LOG_LOWER = "V_LOG_LOWER"
    SUP_RATIO = "SUP_RATIO"
    UPPER_BRANCH_HEIGHT = "UPPER_BRANCH_HEIGHT"
    UPPER_BRANCH_RADIUS = "UPPER_BRANCH_RADIUS"
    UPPER_BRANCH_SLOPE = "UPPER_BRANCH_SLOPE"
    R_STAR_WINDOW = "R_STAR_WINDOW"
    DEPTH_BOUND = "DEPTH_BOUND"
    SLOPE_LIMIT = "SLOPE_LIMIT"


WING_LEVEL = {BoundId.R_STAR_WINDOW, BoundId.DEPTH_BOUND}
UPPER_BRANCH = {BoundId.UPPER_BRANCH_HEIGHT, BoundId.UPPER_BRANCH_RADIUS, BoundId.UPPER_BRANCH_SLOPE}
LOWER_BRANCH = set(BoundId) - WING_LEVEL - UPPER_BRANCH


@dataclass(frozen=True)
class BoundReport:
    bound: Union[BoundId, str]
    r_range: Tuple[float, float]
    grid_size: int
    min_margin: float
    worst_r: float
    tolerance: float
    passed: bool
    note: str = ""

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def to_dict(self) -> dict:
        out = asdict(self)
        out["bound"] = getattr(self.bound, "value", self.bound)
        out["r_range"] = list(self.r_range)
        out["verdict"] = self.verdict
        del out["passed"]
        return out


def alpha_n(n: int) -> float:
    return 1.0 - 1.0 / math.sqrt(2.0 * (n - 1))


def beta_n(n: int) -> float:
    return alpha_n(n) / (n - 1)


def frozen_nonlinearity(r, phi):
    """g(r) = (1 + phi^2) / r^2."""
    r = np.asarray(r, dtype=float)
    return (1.0 + np.asarray(phi) ** 2) / (r * r)


# -- quadrature -------------------------------------------------------------

_GL_X, _GL_W = np.polynomial.legendre.leggauss(5)
_GL2_X, _GL2_W = np.polynomial.legendre.leggauss(10)


def _gauss(f, a, b, x, w):
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    pts = mid[:, None] + half[:, None] * x[None, :]
    vals = f(pts.ravel()).reshape(pts.shape)
    return half * (vals @ w)


def cumulative_integral(f: Callable, nodes: np.ndarray, tol: float, max_depth: int = 30) -> np.ndarray:
    """Cumulative integral of ``f`` at ``nodes`` (starting from 0).

    Each node interval is integrated by adaptive bisection, comparing 5- and
    10-point Gauss-Legendre rules until the local difference is below the
    interval's share of ``tol``.  ``f`` must accept numpy arrays.
    """
    nodes = np.asarray(nodes, dtype=float)
    total = nodes[-1] - nodes[0]
    a, b = nodes[:-1], nodes[1:]
    owner = np.arange(a.size)
    pieces = np.zeros(a.size)
    for _ in range(max_depth):
        if a.size == 0:
            break
        coarse = _gauss(f, a, b, _GL_X, _GL_W)
        fine = _gauss(f, a, b, _GL2_X, _GL2_W)
        ok = np.abs(fine - coarse) <= tol * (b - a) / total
        np.add.at(pieces, owner[ok], fine[ok])
        a, b, owner = a[~ok], b[~ok], owner[~ok]
        mid = 0.5 * (a + b)
        a, b, owner = np.concatenate([a, mid]), np.concatenate([mid, b]), np.concatenate([owner, owner])
    else:
        if a.size:
            raise ArithmeticError("adaptive quadrature did not converge")
    return np.concatenate([[0.0], np.cumsum(pieces)])


def _phi2(x):
    """(1 - e^-x (1 + x)) / x^2, stable near 0."""
    x = np.asarray(x, dtype=float)
    small = x < 1e-3
    xs = np.where(small, 1.0, x)
    big = (1.0 - np.exp(-xs) * (1.0 + xs)) / (xs * xs)
    series = 0.5 - x / 3.0 + x * x / 8.0
    return np.where(small, series, big)


def _phi1(x):
    """(1 - e^-x) / x, stable near 0."""
    x = np.asarray(x, dtype=float)
    xs = np.where(x == 0, 1.0, x)
    return np.where(x == 0, 1.0, -np.expm1(-xs) / xs)


def _identity_rhs(g: GraphProfile, r0: float, targets: np.ndarray, h: float) -> np.ndarray:
    """Right-hand side of the monotonicity identity at ``targets`` with panel width ~h.

    rhs(r) = int_{r0}^r exp(-(G(r) - G(t))) (1 + phi^2) dt + exp(-G(r)) phi(r0),
    G(t) = (n-1) int_{r0}^t (1 + phi^2)/s ds.  On each panel G is taken
    linear (trapezoid) and 1 + phi^2 linear, and the exponential weight is
    integrated exactly; the scheme is second order in h.
    """
    n = g.n
    edges = np.concatenate([[r0], targets])
    counts = np.maximum(1, np.ceil(np.diff(edges) / h).astype(int))
    t = np.concatenate([np.linspace(lo, hi, m + 1)[:-1] for lo, hi, m in zip(edges[:-1], edges[1:], counts)] + [[edges[-1]]])
    target_idx = np.cumsum(counts)
    phi = g.phi_at(t)
    b = 1.0 + phi * phi
    a = (n - 1) * b / t
    hs = np.diff(t)
    dG = 0.5 * hs * (a[:-1] + a[1:])
    q = b[1:] * hs * _phi1(dG) + (b[:-1] - b[1:]) * hs * _phi2(dG)
    G = np.concatenate([[0.0], np.cumsum(dG)])

    I = np.empty(t.size)
    I[0] = 0.0
    start = 0
    while start < t.size - 1:
        # chunk so that exponent differences stay within double range
        end = int(np.searchsorted(G, G[start] + 500.0, side="right")) - 1
        end = max(end, start + 1)
        end = min(end, t.size - 1)
        Ge = G[end]
        w = q[start:end] * np.exp(G[start + 1:end + 1] - Ge)
        S = np.cumsum(w)
        seg = slice(start + 1, end + 1)
        I[seg] = I[start] * np.exp(-(G[seg] - G[start])) + S * np.exp(Ge - G[seg])
        start = end
    rhs = I + np.exp(-G) * float(g.phi_at(r0))
    return rhs[target_idx]


def identity_residual(g: GraphProfile, r0: float, targets, quad_tol: float) -> np.ndarray:
    """|phi(r) - rhs(r)| for the monotonicity identity based at ``r0``.

    The panel width is chosen from a two-level pilot run so that the
    estimated quadrature error is about ``quad_tol``; the achieved residual
    therefore tracks ``quad_tol`` until the interpolation floor is reached.
    """
    targets = np.asarray(targets, dtype=float)
    if not r0 > 0:
        raise DomainError("the identity needs a base radius r0 > 0")
    span = targets[-1] - r0
    h_pilot = span / 20000.0
    coarse = _identity_rhs(g, r0, targets, h_pilot)
    fine = _identity_rhs(g, r0, targets, 0.5 * h_pilot)
    c = np.max(np.abs(fine - coarse)) * (4.0 / 3.0) / h_pilot**2
    h = h_pilot if c == 0 else min(h_pilot, math.sqrt(quad_tol / c))
    if span / h > 2e7:
        raise ArithmeticError(f"quad_tol={quad_tol} needs more than 2e7 panels")
    rhs = _identity_rhs(g, r0, targets, h)
    return np.abs(g.phi_at(targets) - rhs)


# -- margins ----------------------------------------------------------------


def _lower_margin(bound: BoundId, g: GraphProfile, R_star: float, rr: np.ndarray, quad_tol: float):
    n = g.n
    phi = g.phi_at(rr)
    an = alpha_n(n)
    if bound is BoundId.PHI_ENVELOPE:
        phi0 = float(g.phi_at(R_star))
        return np.minimum.reduce([phi - phi0, rr / (n - 1) - phi, g.dphi_at(rr)])
    if bound is BoundId.MONOTONICITY_IDENTITY:
        return -identity_residual(g, rr[0], rr[1:], quad_tol), rr[1:]
    if bound is BoundId.CAUCHY_SCHWARZ:
        J = cumulative_integral(lambda t: t / (1.0 + g.phi_at(t) ** 2), rr, quad_tol)
        return phi - ((rr - R_star) / (n - 1) - np.sqrt(0.5 * (n - 1) * J))
    if bound is BoundId.FIRST_LOWER:
        return phi - an * (rr - R_star) / (n - 1)
    if bound is BoundId.BETA_LOG_LOWER:
        bn = beta_n(n)
        x = rr - R_star
        inner = np.log1p(bn * bn * x * x) / (2 * bn * bn) + math.pi * R_star / (2 * bn)
        return phi - (x / (n - 1) - np.sqrt(0.5 * (n - 1) * inner))
    if bound is BoundId.REFINED_LOWER:
        return phi - ((rr - 4 * R_star) / (n - 1) - 24.0 / rr)
    V_rel = g.V_at(rr) - float(g.V_at(R_star))
    if bound is BoundId.V_QUADRATIC_LOWER:
        return V_rel - an * (rr - R_star) ** 2 / (2 * (n - 1))
    if bound is BoundId.V_LOG_LOWER:
        if not R_star > 0:
            raise DomainError("V_LOG_LOWER needs R* > 0 (log(r/R*))")
        return V_rel - ((rr - R_star) ** 2 / (2 * (n - 1)) - 24.0 * np.log(rr / R_star) - 9 * R_star**2 / (2 * (n - 1)))
    if bound is BoundId.SUP_RATIO:
        return R_star + 1.0 - rr / (1.0 + phi * phi)
    if bound is BoundId.SLOPE_LIMIT:
        return 2 * (n - 1) / rr**2 - np.abs((n - 1) * phi / rr - 1.0)
    raise ValueError(f"{bound} is not a lower-branch bound")


def _lower_range(bound: BoundId, R_star: float, r_range: Tuple[float, float]):
    lo, hi = r_range
    note = ""
    if bound is BoundId.REFINED_LOWER and lo < 1.0:
        lo = max(lo, 1.0)
        note = "radii below 1 skipped"
    if bound is BoundId.SLOPE_LIMIT:
        lo = max(lo, 10.0 * R_star)
        note = "checked for r >= 10 R*"
    if bound is BoundId.MONOTONICITY_IDENTITY and lo <= 0:
        raise DomainError("MONOTONICITY_IDENTITY needs a positive base radius")
    if not lo < hi:
        raise RangeError(f"empty radius range [{lo}, {hi}] for {bound.value}")
    return lo, hi, note


def _upper_margin(bound: BoundId, w: WingSolution, r_range):
    up = w.upper
    n, R = w.n, w.R
    keep = (up.r >= r_range[0]) & (up.r <= r_range[1])
    r, x, a = up.r[keep], up.V[keep], up.alpha[keep]
    if r.size == 0:
        raise RangeError("no upper-branch samples in range")
    # r'(x) = dr/dV = cot(alpha)
    with np.errstate(divide="ignore"):
        dr = np.cos(a) / np.sin(a)
    if bound is BoundId.UPPER_BRANCH_HEIGHT:
        m = (r * r - R * R) / (2 * (n - 1)) + 1.0 - x
    elif bound is BoundId.UPPER_BRANCH_RADIUS:
        m = np.minimum(r - np.sqrt(2 * (n - 1) * (x + np.expm1(-x)) + R * R), dr)
    else:
        m = dr - (n - 1) * (-np.expm1(-x)) / r
    return m, r


def _report(bound, rr, m, tol, r_range, note="") -> BoundReport:
    i = int(np.argmin(m))
    mm = float(m[i])
    return BoundReport(bound, (float(r_range[0]), float(r_range[1])), int(np.size(rr)), mm, float(rr[i]), tol, mm >= -tol, note)


def check_bound(
    w: Union[WingSolution, GraphProfile],
    bound: BoundId,
    r_range: Optional[Tuple[float, float]] = None,
    grid: int = 2000,
    quad_tol: float = 1e-8,
    tolerance: Optional[float] = None,
) -> BoundReport:
    """Check one estimate along a wing (or along a graph starting at a critical point).

    For a :class:`GraphProfile` the first radius plays the role of R* and
    heights are measured from it (the bowl is the case R* = 0).
    """
    bound = BoundId(bound)
    if tolerance is None:
        tolerance = IDENTITY_TOLERANCE if bound is BoundId.MONOTONICITY_IDENTITY else DEFAULT_TOLERANCE

    if isinstance(w, GraphProfile):
        if bound not in LOWER_BRANCH:
            raise TypeError(f"{bound.value} needs a WingSolution")
        g, R_star = w, w.r_lo
        extent = w.r_hi
    else:
        if bound is BoundId.R_STAR_WINDOW:
            m = w.R + math.pi / 2 - w.R_star
            return _report(bound, [w.R_star], np.array([m]), tolerance, (w.R, w.R_star))
        if bound is BoundId.DEPTH_BOUND:
            m = math.pi / 2 * w.R_star / (w.n - 1) - w.d
            return _report(bound, [w.R_star], np.array([m]), tolerance, (w.R, w.R_star))
        if bound in UPPER_BRANCH:
            rng = r_range or (w.R, float(w.upper.r[-1]))
            if rng[1] > w.upper.r[-1] * (1 + 1e-12):
                raise RangeError(f"r={rng[1]} beyond upper branch extent {w.upper.r[-1]}")
            m, rr = _upper_margin(bound, w, rng)
            return _report(bound, rr, m, tolerance, rng)
        g = graph_view(w.lower, w.R_star)
        R_star = w.R_star
        extent = g.r_hi

    rng = r_range or (R_star, extent)
    if rng[0] < R_star * (1 - 1e-12) - 1e-12:
        raise RangeError(f"lower-branch estimates need r >= R* = {R_star}")
    if rng[1] > extent * (1 + 1e-12):
        raise RangeError(f"r={rng[1]} beyond computed extent {extent}")
    lo, hi, note = _lower_range(bound, R_star, rng)
    rr = np.linspace(lo, min(hi, extent), grid)
    out = _lower_margin(bound, g, R_star, rr, quad_tol)
    if isinstance(out, tuple):
        m, rr = out
    else:
        m = out
    return _report(bound, rr, m, tolerance, (lo, hi), note)


def check_on_wing(w: WingSolution, bound: BoundId, r_max: float, quad_tol: float = 1e-8, grid: int = 2000) -> BoundReport:
    """Check ``bound`` up to radius ``r_max``; errors become a failed report."""
    bound = BoundId(bound)
    if bound in WING_LEVEL:
        rng = None
    elif bound in UPPER_BRANCH:
        rng = (w.R, r_max)
    else:
        rng = (w.R_star, r_max)
    try:
        return check_bound(w, bound, rng, grid=grid, quad_tol=quad_tol)
    except (RangeError, DomainError, ArithmeticError, ValueError) as exc:
        rr = rng or (w.R, w.R_star)
        return BoundReport(bound, (float(rr[0]), float(rr[1])), 0, float("-inf"), float("nan"), DEFAULT_TOLERANCE, False, f"error: {exc}")


def check_all(w: WingSolution, r_max: float, quad_tol: float = 1e-8, grid: int = 2000) -> List[BoundReport]:
    """One report per :class:`BoundId`, in enumeration order.

    A check that cannot run (range or domain problem) yields a failed report
    carrying the error message instead of aborting the batch.
    """
    return [check_on_wing(w, b, r_max, quad_tol, grid) for b in BoundId]
