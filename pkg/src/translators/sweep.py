"""Sweeps of barrier families against a rotationally symmetric obstacle.

Everything lives in the meridian half-plane (r >= 0, x).  Wings and the bowl
are represented by piecewise cubic Hermite curves in arc length with exact
unit tangents from the ODE, so crossings with obstacle segments reduce to
roots of cubics.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, replace
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.spatial import cKDTree

from .errors import HypothesisError
from .profile_ode import ProfileCurve, SolverConfig, WingSolution, graph_view, solve_bowl, solve_wing


@dataclass(frozen=True, eq=False)
class ObstacleProfile:
    """Polyline (r_i, x_i) in the meridian half-plane."""

    r: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float).reshape(-1)
        x = np.asarray(self.x, dtype=float).reshape(-1)
        if r.size == 0 or r.size != x.size:
            raise ValueError("obstacle needs matching, nonempty r and x arrays")
        if not (np.all(np.isfinite(r)) and np.all(np.isfinite(x))):
            raise ValueError("obstacle coordinates must be finite")
        if np.any(r < 0):
            raise ValueError("obstacle vertices must have r >= 0")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "x", x)

    @property
    def points(self) -> np.ndarray:
        return np.column_stack([self.r, self.x])

    def shifted(self, dx: float) -> "ObstacleProfile":
        return ObstacleProfile(self.r, self.x + dx)

    def is_simple(self) -> bool:
        pts = self.points
        if len(pts) < 4:
            return True
        hits = intersect(pts, pts, 0.0, _skip_adjacent=True)
        return not hits and not hits.overlapping

    @classmethod
    def from_csv(cls, path) -> "ObstacleProfile":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [h.strip() for h in header] != ["r", "x"]:
                raise ValueError(f"{path}: expected header r,x")
            rows = []
            for k, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != 2:
                    raise ValueError(f"{path}:{k}: expected two columns")
                rows.append((float(row[0]), float(row[1])))
        if not rows:
            raise ValueError(f"{path}: no vertices")
        data = np.array(rows)
        return cls(data[:, 0], data[:, 1])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["r", "x"])
            for a, b in zip(self.r, self.x):
                w.writerow([repr(float(a)), repr(float(b))])


@dataclass(frozen=True)
class SweepResult:
    critical_value: Optional[float]
    touching_point: Optional[Tuple[float, float]]
    iterations: int
    case: str = ""
    grid_resolution: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "critical_value": self.critical_value,
            "touching_point": None if self.touching_point is None else list(self.touching_point),
            "iterations": self.iterations,
            "case": self.case,
            "grid_resolution": self.grid_resolution,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


# -- polyline intersection ------------------------------------------------------


class Crossings(list):
    """List of (r, x) points; ``overlapping`` marks a shared stretch of positive length."""

    overlapping = False


def _point_segment(p, a, b):
    ab = b - a
    L2 = float(ab @ ab)
    t = 0.0 if L2 == 0 else min(1.0, max(0.0, float((p - a) @ ab) / L2))
    q = a + t * ab
    return float(np.hypot(*(p - q))), q


def intersect(a, b, tol: float, _skip_adjacent: bool = False) -> Crossings:
    """Transversal crossings of polylines ``a`` and ``b`` plus near-touches within ``tol``."""
    A = np.atleast_2d(np.asarray(a, dtype=float))
    B = np.atleast_2d(np.asarray(b, dtype=float))
    if A.size == 0 or B.size == 0:
        raise ValueError("polylines must be nonempty")
    out = Crossings()
    pts = []
    if len(A) >= 2 and len(B) >= 2:
        # loop over the shorter polyline, vectorize over the longer one
        S, L = (A, B) if len(A) <= len(B) else (B, A)
        p, r = S[:-1], S[1:] - S[:-1]
        q, s = L[:-1], L[1:] - L[:-1]
        for i in range(len(p)):
            rxs = r[i, 0] * s[:, 1] - r[i, 1] * s[:, 0]
            qp = q - p[i]
            qpxr = qp[:, 0] * r[i, 1] - qp[:, 1] * r[i, 0]
            with np.errstate(divide="ignore", invalid="ignore"):
                t = (qp[:, 0] * s[:, 1] - qp[:, 1] * s[:, 0]) / rxs
                u = qpxr / rxs
            cross = (rxs != 0) & (t >= 0) & (t <= 1) & (u >= 0) & (u <= 1)
            if _skip_adjacent:
                j = np.arange(len(q))
                cross &= np.abs(j - i) > 1
            for jj in np.nonzero(cross)[0]:
                pts.append(p[i] + t[jj] * r[i])
            # collinear pieces
            col = (rxs == 0) & (qpxr == 0)
            if _skip_adjacent:
                col &= np.arange(len(q)) != i
            for jj in np.nonzero(col)[0]:
                adjacent = _skip_adjacent and abs(int(jj) - i) == 1
                rr = float(r[i] @ r[i])
                if rr == 0:
                    continue
                t0 = float(qp[jj] @ r[i]) / rr
                t1 = t0 + float(s[jj] @ r[i]) / rr
                lo, hi = max(0.0, min(t0, t1)), min(1.0, max(t0, t1))
                if (hi - lo) * math.sqrt(rr) > max(tol, 0.0):
                    out.overlapping = True
                elif hi >= lo and not adjacent:
                    pts.append(p[i] + lo * r[i])
    if tol > 0 and not _skip_adjacent:
        for P, Q in ((A, B), (B, A)):
            for v in P:
                if len(Q) == 1:
                    d, c = float(np.hypot(*(v - Q[0]))), Q[0]
                    if d <= tol:
                        pts.append(0.5 * (v + c))
                    continue
                for k in range(len(Q) - 1):
                    d, c = _point_segment(v, Q[k], Q[k + 1])
                    if d <= tol:
                        pts.append(0.5 * (v + c))
    for pt in pts:
        if all(math.hypot(pt[0] - o[0], pt[1] - o[1]) > max(tol, 1e-15) for o in out):
            out.append((float(pt[0]), float(pt[1])))
    return out


# -- smooth barrier curves ------------------------------------------------------


class HermiteCurve:
    """C^1 curve through points P_i with unit tangents T_i at arc length sigma_i."""

    def __init__(self, sigma, points, tangents):
        self.sigma = np.asarray(sigma, dtype=float)
        self.P = np.asarray(points, dtype=float)
        self.T = np.asarray(tangents, dtype=float)
        h = np.diff(self.sigma)[:, None]
        P0, P1, T0, T1 = self.P[:-1], self.P[1:], h * self.T[:-1], h * self.T[1:]
        # power-basis coefficients of each piece in theta in [0, 1]
        self.coef = np.stack([P0, T0, -3 * P0 - 2 * T0 + 3 * P1 - T1, 2 * P0 + T0 - 2 * P1 + T1], axis=1)
        ctrl = np.stack([P0, P0 + T0 / 3, P1 - T1 / 3, P1], axis=1)
        self.lo = ctrl.min(axis=1)
        self.hi = ctrl.max(axis=1)
        self._tree = cKDTree(self.P)

    @classmethod
    def from_profile(cls, curve: ProfileCurve) -> "HermiteCurve":
        pts = np.column_stack([curve.r, curve.V])
        tan = np.column_stack([np.cos(curve.alpha), np.sin(curve.alpha)])
        return cls(curve.s, pts, tan)

    @classmethod
    def from_wing(cls, w: WingSolution) -> "HermiteCurve":
        return cls.from_profile(w.meridian_curve())

    def point(self, i: int, theta: float) -> np.ndarray:
        c = self.coef[i]
        return c[0] + theta * (c[1] + theta * (c[2] + theta * c[3]))

    def segment_hits(self, p0, p1) -> List[np.ndarray]:
        """Points where the straight segment p0-p1 meets the curve."""
        d = p1 - p0
        blo, bhi = np.minimum(p0, p1), np.maximum(p0, p1)
        cand = np.nonzero(np.all(self.lo <= bhi, axis=1) & np.all(self.hi >= blo, axis=1))[0]
        nrm = np.array([-d[1], d[0]])
        L2 = float(d @ d)
        hits = []
        for i in cand:
            c = self.coef[i] - np.stack([p0, 0 * p0, 0 * p0, 0 * p0])
            g = c @ nrm  # cubic in theta, ascending
            if L2 == 0:
                continue
            roots = np.roots(g[::-1]) if np.any(g[1:]) else []
            for th in roots:
                if abs(th.imag) > 1e-12:
                    continue
                th = th.real
                if -1e-12 <= th <= 1 + 1e-12:
                    pt = self.point(i, min(1.0, max(0.0, th)))
                    t = float((pt - p0) @ d) / L2
                    if -1e-12 <= t <= 1 + 1e-12:
                        hits.append(pt)
        return hits

    def nearest(self, pts) -> Tuple[np.ndarray, np.ndarray]:
        dist, idx = self._tree.query(np.atleast_2d(pts))
        return dist, self.P[idx]

    def meets(self, obstacle: ObstacleProfile, tol: float) -> Optional[Tuple[float, float]]:
        """First contact point with the obstacle, or None."""
        pts = obstacle.points
        dist, near = self.nearest(pts)
        k = int(np.argmin(dist))
        if dist[k] <= tol:
            return float(near[k][0]), float(near[k][1])
        for j in range(len(pts) - 1):
            hits = self.segment_hits(pts[j], pts[j + 1])
            if hits:
                return float(hits[0][0]), float(hits[0][1])
        return None


# -- aperture sweep -------------------------------------------------------------


def _barrier(n: int, R: float, r_reach: float, cfg: SolverConfig) -> HermiteCurve:
    cfg = replace(cfg, r_max=r_reach)
    if R == 0:
        return HermiteCurve.from_profile(solve_bowl(n, cfg))
    return HermiteCurve.from_wing(solve_wing(n, R, cfg))


def sweep_aperture(
    obstacle: ObstacleProfile,
    n: int,
    R0: float,
    tol: float = 1e-7,
    grid: int = 24,
    cfg: SolverConfig = SolverConfig(),
) -> SweepResult:
    """Largest R in [0, R0] whose barrier (bowl at R = 0, wing otherwise) meets the obstacle.

    The predicate is evaluated on ``grid`` + 1 equally spaced apertures and
    the largest meeting aperture is refined by bisection against its right
    neighbour; contacts closer than the grid spacing can be missed.
    """
    if not R0 > 0:
        raise ValueError("R0 must be positive")
    reach = 2.0 * float(np.max(obstacle.r)) + 10.0
    cache = {}

    def meets(R):
        if R not in cache:
            cache[R] = _barrier(n, R, reach, cfg).meets(obstacle, tol)
        return cache[R]

    if meets(R0) is not None:
        raise HypothesisError(f"obstacle already meets the R0 = {R0} barrier at {meets(R0)}")
    Rs = np.linspace(0.0, R0, grid + 1)
    hit = [R for R in Rs[:-1] if meets(float(R)) is not None]
    its = len(Rs)
    if not hit:
        return SweepResult(None, None, its, "family_missed", R0 / grid)
    lo = float(hit[-1])
    hi = float(Rs[np.searchsorted(Rs, lo) + 1])
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        its += 1
        if meets(mid) is not None:
            lo = mid
        else:
            hi = mid
    case = "touching_all" if len(hit) == grid else "touching"
    return SweepResult(lo, meets(lo), its, case, R0 / grid)


# -- vertical sweep of the bowl ------------------------------------------------


def _segment_gap(g, sign, p0, p1) -> Tuple[float, float]:
    """(min over the segment of sign*(x - u0(r)), location t)."""
    def gap(t):
        r = p0[0] + t * (p1[0] - p0[0])
        x = p0[1] + t * (p1[1] - p0[1])
        return sign * (x - float(g.V_at(r)))

    ts = np.linspace(0.0, 1.0, 65)
    vals = np.array([gap(t) for t in ts])
    k = int(np.argmin(vals))
    a, b = ts[max(0, k - 1)], ts[min(len(ts) - 1, k + 1)]
    if a < b:
        res = minimize_scalar(gap, bounds=(a, b), method="bounded", options={"xatol": 1e-13})
        if res.fun < vals[k]:
            return float(res.fun), float(res.x)
    return float(vals[k]), float(ts[k])


def sweep_translate(
    obstacle: ObstacleProfile,
    n: int,
    sign: int,
    tol: float = 1e-7,
    bowl_offset: float = 0.0,
    cfg: SolverConfig = SolverConfig(),
) -> SweepResult:
    """First-contact translate of the bowl u0 + bowl_offset towards the obstacle.

    sign = -1: obstacle strictly below the bowl, which is pushed down by s;
    sign = +1: obstacle strictly above, bowl pushed up.
    """
    if sign not in (-1, 1):
        raise ValueError("sign must be +1 or -1")
    reach = float(np.max(obstacle.r)) * 1.1 + 1.0
    g = graph_view(solve_bowl(n, replace(cfg, r_max=reach)), 0.0)
    pts = obstacle.points - np.array([0.0, bowl_offset])
    side = sign * (pts[:, 1] - g.V_at(pts[:, 0]))
    if np.any(side <= 0):
        k = int(np.argmin(side))
        raise HypothesisError(f"vertex {tuple(obstacle.points[k])} is not strictly on the {'upper' if sign > 0 else 'lower'} side of the bowl")

    # minimal gap per segment (vertices alone for a point obstacle)
    best, where = float(np.min(side)), obstacle.points[int(np.argmin(side))]
    for j in range(len(pts) - 1):
        m, t = _segment_gap(g, sign, pts[j], pts[j + 1])
        if m < best:
            best = m
            where = obstacle.points[j] + t * (obstacle.points[j + 1] - obstacle.points[j])

    def meets(s):
        return best <= s

    lo, hi, its = 0.0, 1.0, 0
    while not meets(hi):
        lo, hi = hi, 2 * hi
        its += 1
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        its += 1
        if meets(mid):
            hi = mid
        else:
            lo = mid
    return SweepResult(hi, (float(where[0]), float(where[1])), its, "translate")
