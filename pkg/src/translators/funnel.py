"""Solid parabolic funnels pointing along the vertical axis.

A funnel with aperture R0 and logarithmic parameter lam is the closed set of
points (p, x) with |p| >= R0 and f_minus(|p|) <= x <= f_plus(|p|), measured
relative to its center y0.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
from scipy.optimize import brentq

from .bounds import BoundReport
from .errors import ConstructionError, DomainError, RangeError
from .profile_ode import WingSolution

CONTAINMENT = "FUNNEL_CONTAINMENT"


@dataclass(frozen=True)
class Funnel:
    n: int
    R0: float
    lam: float
    y0_horizontal: Tuple[float, ...] = field(default=None)
    y0_vertical: float = 0.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise DomainError(f"n must be an integer >= 2, got {self.n}")
        if not self.R0 >= 0:
            raise DomainError(f"aperture must be >= 0, got {self.R0}")
        if not self.lam >= 0:
            raise DomainError(f"lambda must be >= 0, got {self.lam}")
        h = (0.0,) * self.n if self.y0_horizontal is None else tuple(float(v) for v in self.y0_horizontal)
        if len(h) != self.n:
            raise DomainError(f"horizontal center needs {self.n} components, got {len(h)}")
        object.__setattr__(self, "y0_horizontal", h)
        object.__setattr__(self, "y0_vertical", float(self.y0_vertical))

    def shifted(self, dx: float) -> "Funnel":
        return Funnel(self.n, self.R0, self.lam, self.y0_horizontal, self.y0_vertical + dx)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "R0": self.R0,
            "lambda": self.lam,
            "y0_horizontal": list(self.y0_horizontal),
            "y0_vertical": self.y0_vertical,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "Funnel":
        d = json.loads(text)
        return cls(d["n"], d["R0"], d["lambda"], tuple(d["y0_horizontal"]), d["y0_vertical"])


@dataclass(frozen=True)
class BoundingBox:
    r_max: float
    V_min: float
    V_max: float

    def __post_init__(self):
        if not (self.r_max >= 0 and self.V_min <= self.V_max):
            raise ValueError(f"degenerate box {self}")

    def to_dict(self) -> dict:
        return {"r_max": self.r_max, "V_min": self.V_min, "V_max": self.V_max}


# -- walls ------------------------------------------------------------------


def _offset(n, R0):
    return (math.pi * (R0 + math.pi / 2) + 4.0) / (2 * (n - 1))


def upper_wall(n: int, r):
    r = np.asarray(r, dtype=float)
    return r * r / (2 * (n - 1)) + 1.0


def lower_wall(n: int, R0: float, lam: float, r):
    u = np.asarray(r, dtype=float) - R0 - 2.0
    return u * u / (2 * (n - 1)) - 0.5 * lam * np.log1p(u * u) - _offset(n, R0)


def funnel_walls(f: Funnel, r):
    """(f_minus(r), f_plus(r)) in the funnel's own frame; scalars or arrays."""
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < f.R0):
        raise DomainError(f"walls are defined for r >= R0 = {f.R0}")
    lo, hi = lower_wall(f.n, f.R0, f.lam, r_arr), upper_wall(f.n, r_arr)
    if lo.ndim == 0:
        return float(lo), float(hi)
    return lo, hi


def _local(f: Funnel, point):
    pt = np.asarray(point, dtype=float)
    if pt.shape != (f.n + 1,):
        raise DomainError(f"point must have {f.n + 1} coordinates")
    p = pt[:-1] - np.asarray(f.y0_horizontal)
    return float(np.linalg.norm(p)), float(pt[-1] - f.y0_vertical)


def margin(f: Funnel, point) -> float:
    """Signed distance-like margin: >= 0 exactly for points of the closed funnel."""
    rho, x = _local(f, point)
    if rho < f.R0:
        return rho - f.R0
    lo, hi = funnel_walls(f, rho)
    return min(x - lo, hi - x)


def contains(f: Funnel, point) -> bool:
    rho, x = _local(f, point)
    if rho < f.R0:
        return False
    lo, hi = funnel_walls(f, rho)
    return lo <= x <= hi


def verify_wing_containment(w: WingSolution, lam: float, r_max: float, y0_vertical: float = 0.0) -> BoundReport:
    """Check both branches of ``w`` against the funnel of aperture w.R.

    ``y0_vertical`` moves funnel and wing together; the margins do not change.
    """
    if not lam >= 0:
        raise DomainError("lambda must be >= 0")
    extent = min(float(w.lower.r[-1]), float(w.upper.r[-1]))
    if r_max > extent * (1 + 1e-12):
        raise RangeError(f"r_max={r_max} beyond computed extent {extent}")
    f = Funnel(w.n, w.R, lam, None, y0_vertical)
    r = np.concatenate([w.lower.r, w.upper.r])
    x = np.concatenate([w.lower.V, w.upper.V]) + y0_vertical
    keep = (r >= w.R) & (r <= r_max)
    r, x = r[keep], x[keep] - f.y0_vertical
    lo, hi = funnel_walls(f, r)
    m = np.minimum(x - lo, hi - x)
    i = int(np.argmin(m))
    mm = float(m[i])
    return BoundReport(CONTAINMENT, (float(w.R), float(r_max)), int(r.size), mm, float(r[i]), 0.0, mm >= 0.0, f"lambda={lam}")


# -- compactness of the family excess ----------------------------------------


def _tail_start(n, lam, R0):
    # beyond this radius the excess gap f_-^(R) - f_-^(R0) is increasing
    return R0 + 2.0 + max(1.0, math.sqrt(2.0 * lam * (n - 1)))


def crossing_radius(n: int, lam: float, R: float, R0: float, cap: float = 1e6, grid: int = 1000) -> float:
    """Largest r >= R with f_-^(R)(r) = f_-^(R0)(r), both walls read as formulas.

    Returns R when the walls never meet.
    """
    if R == R0:
        return _limit_crossing(n, lam, R0)
    gap = lambda r: lower_wall(n, R, lam, r) - lower_wall(n, R0, lam, r)
    hi = _tail_start(n, lam, R0)
    while gap(hi) <= 0:
        hi = 2 * hi
        if hi > cap:
            raise ConstructionError(f"no crossing below {cap}; the excess region looks unbounded")
    rr = np.linspace(R, hi, grid)
    neg = np.nonzero(gap(rr) <= 0)[0]
    if neg.size == 0:
        return float(R)
    k = int(neg[-1])
    return float(brentq(gap, rr[k], rr[k + 1], xtol=1e-13, rtol=1e-15))


def _limit_crossing(n, lam, R0):
    """Crossing radius of the R -> R0 limit, where the gap divided by R0 - R tends to d/dR0 f_-."""
    def rate(r):
        u = r - R0 - 2.0
        return u / (n - 1) - lam * u / (1 + u * u) + math.pi / (2 * (n - 1))

    hi = _tail_start(n, lam, R0)
    rr = np.linspace(R0, hi, 1000)
    vals = np.array([rate(v) for v in rr])
    neg = np.nonzero(vals <= 0)[0]
    if neg.size == 0:
        return float(R0)
    k = int(neg[-1])
    return float(brentq(rate, rr[k], rr[k + 1], xtol=1e-13, rtol=1e-15))


def excess_region_bound(n: int, lam: float, R0: float, n_R: int = 201, cap: float = 1e6) -> BoundingBox:
    """Box containing F_R minus F_R0 for every R in [0, R0], sampled on ``n_R`` apertures."""
    if not R0 > 0:
        raise DomainError("R0 must be positive")
    if not lam >= 0:
        raise DomainError("lambda must be >= 0")
    Rs = np.linspace(0.0, R0, n_R)
    # the hole R <= r < R0 is always excess
    r_max = max([R0] + [crossing_radius(n, lam, float(R), R0, cap) for R in Rs])
    V_min = math.inf
    # R = R0 enters as the limit of R -> R0, whose excess hugs the R0 wall
    for R in Rs:
        rr = np.linspace(R, r_max, 2000)
        V_min = min(V_min, float(np.min(lower_wall(n, float(R), lam, rr))))
    rr = np.linspace(R0, r_max, 2000)
    # above the R0 lower wall nothing is excess once r >= R0; inside the hole f_plus caps it
    V_max = max(float(upper_wall(n, R0)), float(np.max(lower_wall(n, R0, lam, rr))))
    return BoundingBox(float(r_max), V_min, V_max)


# -- placements ------------------------------------------------------------


def wall_minimum(n: int, R0: float, lam: float) -> Tuple[float, float]:
    """(radius, value) of the global minimum of f_minus over r >= R0."""
    # f_minus is even in u = r - R0 - 2 and u = 0 is inside the domain
    q = lam * (n - 1) - 1.0
    u = math.sqrt(q) if q > 0 else 0.0
    r = R0 + 2.0 + u
    return r, float(lower_wall(n, R0, lam, r))


def sample_points(f: Funnel, count: int, span: float = 50.0, seed: int = 0) -> np.ndarray:
    """``count`` random points of the funnel with |p| - R0 <= span."""
    rng = np.random.default_rng(seed)
    rho = f.R0 + span * rng.random(count)
    lo, hi = funnel_walls(f, rho)
    x = lo + (hi - lo) * rng.random(count)
    d = rng.standard_normal((count, f.n))
    d /= np.linalg.norm(d, axis=1)[:, None]
    p = rho[:, None] * d + np.asarray(f.y0_horizontal)
    return np.column_stack([p, x + f.y0_vertical])


def funnel_avoiding_half_cylinder(n: int, rho: float, h0: float, lam: float, audit: int = 10_000) -> Funnel:
    """Funnel lying in the complement of {x <= h0} united with the solid cylinder of radius rho above h0."""
    if not rho > 0:
        raise DomainError("cylinder radius must be positive")
    _, low = wall_minimum(n, rho, lam)
    f = Funnel(n, rho, lam, None, h0 - low + 1.0)
    pts = sample_points(f, audit)
    radial = np.linalg.norm(pts[:, :-1], axis=1)
    if not (np.all(pts[:, -1] > h0) and np.all(radial >= rho * (1 - 1e-15))):
        raise ConstructionError("sampling audit found a funnel point inside the half-cylinder")
    return f


def funnel_avoiding_cylinder(n: int, rho: float, lam: float) -> Funnel:
    """Any height works for a full vertical cylinder; the funnel is centered at the origin."""
    if not rho > 0:
        raise DomainError("cylinder radius must be positive")
    return Funnel(n, rho, lam)
