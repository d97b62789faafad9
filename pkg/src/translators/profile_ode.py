"""Generating curves of rotationally symmetric translating solitons.

A translator that is symmetric about the x_{n+1} axis is generated by a
planar curve (r(s), V(s)) with tangent angle alpha(s).  Parametrized by arc
length the soliton equation H = <e_{n+1}, nu> becomes

    r' = cos(alpha),   V' = sin(alpha),   alpha' = cos(alpha) - (n-1) sin(alpha) / r,

which stays regular through vertical tangents.  Where cos(alpha) > 0 the
curve is a graph V(r) whose slope phi = tan(alpha) obeys

    phi' = (1 + phi^2) (1 - (n-1) phi / r).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, List, Optional, Tuple

import numpy as np
from scipy.interpolate import PPoly

from . import _dopri
from .errors import (
    ConstructionError,
    DomainError,
    IntegrationError,
    RangeError,
    ReparametrizationError,
)

__all__ = [
    "SolverConfig",
    "ProfileCurve",
    "WingSolution",
    "GraphProfile",
    "translator_rhs",
    "graph_slope_rhs",
    "axis_series",
    "solve_bowl",
    "solve_wing",
    "graph_view",
    "translator_residual",
]

HALF_PI = 0.5 * math.pi


@dataclass(frozen=True)
class SolverConfig:
    """Integration settings.

    ``s_max`` optionally stops the integration at a fixed arc length (the last
    step is clipped to land on it); ``adaptive=False`` runs fixed steps of
    size ``step_init``, which is how convergence order is measured.
    """

    step_init: float = 1e-3
    tol_abs: float = 1e-10
    tol_rel: float = 1e-10
    r_max: float = 100.0
    max_steps: int = 2_000_000
    axis_series: float = 0.5
    step_max: float = math.inf
    s_max: float = math.inf
    adaptive: bool = True
    event_tol: float = 1e-12

    def __post_init__(self):
        if not (self.tol_abs > 0 and self.tol_rel > 0):
            raise ValueError("tolerances must be positive")
        if not self.r_max > 0:
            raise ValueError("r_max must be positive")
        if not self.max_steps > 0:
            raise ValueError("max_steps must be positive")
        if not (self.step_init > 0 and self.step_max > 0):
            raise ValueError("step sizes must be positive")
        if not 0 < self.axis_series <= 1.0:
            raise ValueError("axis_series must lie in (0, 1]")

    @classmethod
    def with_tol(cls, tol: float, **kwargs) -> "SolverConfig":
        return cls(tol_abs=tol, tol_rel=tol, **kwargs)


@dataclass(frozen=True, eq=False)
class ProfileCurve:
    """Arc-length samples (s, r, V, alpha) of a generating curve."""

    n: int
    s: np.ndarray
    r: np.ndarray
    V: np.ndarray
    alpha: np.ndarray

    def __post_init__(self):
        arrays = [np.array(a, dtype=float) for a in (self.s, self.r, self.V, self.alpha)]
        if len({a.shape for a in arrays}) != 1 or arrays[0].ndim != 1:
            raise ValueError("s, r, V, alpha must be 1-d arrays of equal length")
        if arrays[0].size >= 2 and not np.all(np.diff(arrays[0]) > 0):
            raise ValueError("arc length must be strictly increasing")
        for name, a in zip(("s", "r", "V", "alpha"), arrays):
            a.flags.writeable = False
            object.__setattr__(self, name, a)

    def __len__(self) -> int:
        return self.s.size

    @property
    def phi(self) -> np.ndarray:
        return np.tan(self.alpha)

    def derivatives(self) -> np.ndarray:
        """(r', V', alpha') at every sample, shape (len, 3).

        On the axis (r = 0) the removable singularity is filled with the
        limit alpha' = 1/n.
        """
        out = np.empty((len(self), 3))
        out[:, 0] = np.cos(self.alpha)
        out[:, 1] = np.sin(self.alpha)
        with np.errstate(divide="ignore", invalid="ignore"):
            da = out[:, 0] - (self.n - 1) * out[:, 1] / self.r
        da[self.r == 0] = 1.0 / self.n
        out[:, 2] = da
        return out

    def state_at(self, s: float) -> Tuple[float, float, float]:
        """Cubic-Hermite dense output of (r, V, alpha) at arc length ``s``."""
        if not self.s[0] <= s <= self.s[-1]:
            raise RangeError(f"s={s} outside [{self.s[0]}, {self.s[-1]}]")
        i = int(np.searchsorted(self.s, s, side="right")) - 1
        i = min(i, len(self) - 2)
        d = self.derivatives()
        h = self.s[i + 1] - self.s[i]
        y0 = (self.r[i], self.V[i], self.alpha[i])
        y1 = (self.r[i + 1], self.V[i + 1], self.alpha[i + 1])
        return _dopri.hermite(y0, tuple(d[i]), y1, tuple(d[i + 1]), h, (s - self.s[i]) / h)

    def translated(self, dV: float) -> "ProfileCurve":
        return ProfileCurve(self.n, self.s, self.r, self.V + dV, self.alpha)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["s", "r", "V", "alpha"])
            for row in zip(self.s, self.r, self.V, self.alpha):
                writer.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path, n: int) -> "ProfileCurve":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != ["s", "r", "V", "alpha"]:
                raise ValueError(f"{path}: expected header s,r,V,alpha, got {header}")
            rows = [[float(v) for v in row] for row in reader if row]
        if not rows:
            raise ValueError(f"{path}: no samples")
        data = np.array(rows)
        return cls(n, data[:, 0], data[:, 1], data[:, 2], data[:, 3])


@dataclass(frozen=True, eq=False)
class WingSolution:
    """Two-ended winglike translator with vertical tangent at (R, 0)."""

    n: int
    R: float
    R_star: float
    d: float
    lower: ProfileCurve
    upper: ProfileCurve

    def meridian(self) -> np.ndarray:
        """(r, x) polyline from the far end of the lower branch through (R, 0) to the upper end."""
        lo = np.column_stack([self.lower.r[::-1], self.lower.V[::-1]])
        up = np.column_stack([self.upper.r[1:], self.upper.V[1:]])
        return np.vstack([lo, up])

    def meridian_curve(self) -> ProfileCurve:
        """The whole meridian as one solution curve, arc length 0 at the neck.

        Reversing the lower branch maps alpha to alpha + pi, which leaves the
        ODE unchanged, so the result is again a ProfileCurve.
        """
        lo, up = self.lower, self.upper
        return ProfileCurve(
            self.n,
            np.concatenate([-lo.s[::-1], up.s[1:]]),
            np.concatenate([lo.r[::-1], up.r[1:]]),
            np.concatenate([lo.V[::-1], up.V[1:]]),
            np.concatenate([lo.alpha[::-1] + math.pi, up.alpha[1:]]),
        )


def _quintic_hermite(x, y, dy, ddy) -> PPoly:
    """Piecewise quintic matching value, first and second derivative at every node."""
    h = np.diff(x)
    c0, c1, c2 = y[:-1], dy[:-1], 0.5 * ddy[:-1]
    A = y[1:] - (c0 + h * (c1 + h * c2))
    B = (dy[1:] - (c1 + 2 * h * c2)) * h
    C = (ddy[1:] - 2 * c2) * h * h
    c3 = (10 * A - 4 * B + 0.5 * C) / h**3
    c4 = (-15 * A + 7 * B - C) / h**4
    c5 = (6 * A - 3 * B + 0.5 * C) / h**5
    return PPoly(np.vstack([c5, c4, c3, c2, c1, c0]), x)


@dataclass(frozen=True, eq=False)
class GraphProfile:
    """A piece of generating curve written as a graph V(r) with slope phi."""

    n: int
    r_grid: np.ndarray
    V: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    _splines: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.r_grid.size < 2 or not np.all(np.diff(self.r_grid) > 0):
            raise ReparametrizationError("r_grid must be strictly increasing with >= 2 points")

    @property
    def r_lo(self) -> float:
        return float(self.r_grid[0])

    @property
    def r_hi(self) -> float:
        return float(self.r_grid[-1])

    def _spline(self, key):
        # quintic Hermite: value, slope and curvature all come from the ODE
        if key not in self._splines:
            d2phi = graph_slope_second_derivative(self.n, self.r_grid, self.phi, self.dphi)
            if key == "V":
                data = np.column_stack([self.V, self.phi, self.dphi])
            else:
                data = np.column_stack([self.phi, self.dphi, d2phi])
            self._splines[key] = _quintic_hermite(self.r_grid, *data.T)
        return self._splines[key]

    def _check(self, r):
        r = np.asarray(r, dtype=float)
        slack = 1e-12 * max(1.0, self.r_hi)
        if np.any(r < self.r_lo - slack) or np.any(r > self.r_hi + slack):
            raise RangeError(f"radius outside [{self.r_lo}, {self.r_hi}]")
        return np.clip(r, self.r_lo, self.r_hi)

    def V_at(self, r):
        return self._spline("V")(self._check(r))

    def phi_at(self, r):
        return self._spline("phi")(self._check(r))

    def dphi_at(self, r):
        """Slope derivative from the ODE applied to the interpolated slope."""
        r = self._check(r)
        return graph_slope_rhs(self.n, r, self.phi_at(r))


def translator_rhs(n: int, state) -> Tuple[float, float, float]:
    """Arc-length derivative of (r, V, alpha)."""
    r, _, a = state
    if not r > 0:
        raise DomainError(f"r={r}: the profile equation is singular on the axis")
    ca, sa = math.cos(a), math.sin(a)
    return ca, sa, ca - (n - 1) * sa / r


def graph_slope_rhs(n: int, r, phi):
    """phi'(r) = (1 + phi^2)(1 - (n-1) phi / r) for a graph V(r)."""
    r = np.asarray(r, dtype=float)
    phi = np.asarray(phi, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (1.0 + phi * phi) * (1.0 - (n - 1) * phi / r)
    # axis limit of phi/r is 1/n
    return np.where(r == 0, 1.0 / n, out)


def graph_slope_second_derivative(n: int, r, phi, dphi):
    """phi'' obtained by differentiating the slope equation once more."""
    r = np.asarray(r, dtype=float)
    phi = np.asarray(phi, dtype=float)
    dphi = np.asarray(dphi, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = 2 * phi * dphi * (1.0 - (n - 1) * phi / r) - (1.0 + phi * phi) * (n - 1) * (dphi / r - phi / (r * r))
    # phi is odd about the axis
    return np.where(r == 0, 0.0, out)


def _make_rhs(n: int) -> Callable:
    nm1 = n - 1
    cos, sin = math.cos, math.sin

    def f(y):
        r, _, a = y
        if r <= 0:
            raise DomainError(f"r={r}: the profile equation is singular on the axis")
        ca = cos(a)
        sa = sin(a)
        return ca, sa, ca - nm1 * sa / r

    return f


def _integrate(
    n: int,
    s0: float,
    y0: Tuple[float, float, float],
    cfg: SolverConfig,
    turning_event: bool = False,
):
    """March from ``y0`` until r >= r_max or s >= s_max.

    Returns (samples, event) where samples is a list of (s, r, V, alpha) and
    event is the index of the sample sitting on the alpha = 0 crossing (or
    None).  Only upward crossings (alpha from < 0 to >= 0) are tracked.
    """
    f = _make_rhs(n)
    y = tuple(float(v) for v in y0)
    s = float(s0)
    k = f(y)
    h = min(cfg.step_init, cfg.step_max)
    samples = [(s, *y)]
    event_index: Optional[int] = None
    steps = 0
    atol, rtol = cfg.tol_abs, cfg.tol_rel

    while y[0] < cfg.r_max and s < cfg.s_max:
        if steps >= cfg.max_steps:
            raise IntegrationError(f"max_steps={cfg.max_steps} exceeded at s={s}", (s, *y))
        steps += 1
        h = min(h, cfg.s_max - s)
        try:
            y_new, k_new, err = _dopri.step(f, y, k, h)
        except DomainError:
            y_new = None
        if y_new is None or not _dopri.is_finite(y_new):
            if not cfg.adaptive or h < 1e-14 * max(1.0, abs(s)):
                raise IntegrationError(f"step failure at s={s}", (s, *y))
            h *= 0.25
            continue
        if cfg.adaptive:
            en = _error_norm(err, y, y_new, atol, rtol)
            if en > 1.0:
                h = _dopri.next_step(h, en)
                if h < 1e-14 * max(1.0, abs(s)):
                    raise IntegrationError(f"step size underflow at s={s}", (s, *y))
                continue
            h_next = min(_dopri.next_step(h, en), cfg.step_max)
        else:
            h_next = cfg.step_init

        if turning_event and event_index is None and y[2] < 0.0 <= y_new[2]:
            h_ev = _bisect_turning(f, y, k, h, cfg.event_tol)
            y_ev, k_ev, _ = _dopri.step(f, y, k, h_ev)
            s_ev = s + h_ev
            if h_ev > 0 and s_ev > s:
                samples.append((s_ev, *y_ev))
                y, k, s = y_ev, k_ev, s_ev
            event_index = len(samples) - 1
            h = max(h - h_ev, min(cfg.step_init, h))
            continue

        s = s + h if s + h < cfg.s_max else cfg.s_max
        y, k = y_new, k_new
        samples.append((s, *y))
        if not -HALF_PI - 1e-9 <= y[2] <= HALF_PI + 1e-9:
            raise IntegrationError(f"tangent angle left (-pi/2, pi/2) at s={s}", (s, *y))
        h = h_next
    return samples, event_index


def _error_norm(err, y0, y1, atol, rtol):
    # the angle is weighted by cos^2(alpha) so the slope tan(alpha) gets the
    # requested accuracy near vertical tangents as well
    e_r, e_V, e_a = err
    c2 = max(math.cos(y1[2]) ** 2, 1e-8)
    return max(
        abs(e_r) / (atol + rtol * max(abs(y0[0]), abs(y1[0]))),
        abs(e_V) / (atol + rtol * max(abs(y0[1]), abs(y1[1]))),
        abs(e_a) / (c2 * (atol + rtol * max(abs(y0[2]), abs(y1[2])))),
    )


def _bisect_turning(f, y, k, h, tol):
    """Arc-length offset in (0, h] where alpha crosses zero, by bisection on full RK steps."""
    lo, hi = 0.0, h
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _dopri.step(f, y, k, mid)[0][2] < 0.0:
            lo = mid
        else:
            hi = mid
    return hi


def _curve(n, samples) -> ProfileCurve:
    data = np.array(samples, dtype=float)
    return ProfileCurve(n, data[:, 0], data[:, 1], data[:, 2], data[:, 3])


def axis_series(n: int, order: int = 40) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Taylor coefficients in s of (r, V, alpha) for the curve leaving the axis horizontally.

    The singular term sin(alpha)/r only fixes the next alpha coefficient
    through the factor (k + n), so the recurrence is explicit.
    """
    N = order
    r, a, V = np.zeros(N + 1), np.zeros(N + 1), np.zeros(N + 1)
    S, C, Q = np.zeros(N + 1), np.zeros(N + 1), np.zeros(N + 1)
    r[1], a[1], C[0] = 1.0, 1.0 / n, 1.0
    S[1] = a[1]
    V[2] = S[1] / 2
    Q[0] = a[1]  # Q = sin(alpha)/r
    for k in range(1, N):
        r[k + 1] = C[k] / (k + 1)
        j = np.arange(1, k + 1)
        s_known = float(np.sum(j * a[j] * C[k + 1 - j])) / (k + 1)
        q_known = s_known - float(np.sum(r[j + 1] * Q[k - j]))
        a[k + 1] = (C[k] - (n - 1) * q_known) / (k + n)
        Q[k] = q_known + a[k + 1]
        m = k + 1
        j = np.arange(1, m + 1)
        S[m] = float(np.sum(j * a[j] * C[m - j])) / m
        C[m] = -float(np.sum(j * a[j] * S[m - j])) / m
        if m + 1 <= N:
            V[m + 1] = S[m] / (m + 1)
    return r, V, a


def solve_bowl(n: int, cfg: SolverConfig = SolverConfig()) -> ProfileCurve:
    """Profile of the bowl soliton, starting on the axis.

    The stretch s <= cfg.axis_series comes from the Taylor series of the
    solution (33 samples, the first one the axis point (0, 0, 0, 0)); the
    integrator takes over from there.  Starting the integrator on the axis
    itself would cost one order of accuracy to the singular sin(alpha)/r term.
    """
    if n < 2:
        raise DomainError("n must be >= 2")
    cr, cV, ca = axis_series(n)
    s_series = np.linspace(0.0, cfg.axis_series, 33)
    if cfg.s_max < cfg.axis_series:
        s_series = s_series[s_series < cfg.s_max]
        s_series = np.append(s_series, cfg.s_max)
    ev = lambda c, t: float(np.polynomial.polynomial.polyval(t, c))
    head = [(float(t), ev(cr, t), ev(cV, t), ev(ca, t)) for t in s_series]
    if head[-1][1] >= cfg.r_max or s_series[-1] >= cfg.s_max:
        keep = [h for h in head if h[1] <= cfg.r_max] or head[:2]
        return _curve(n, keep)
    s0, *y0 = head[-1]
    samples, _ = _integrate(n, s0, tuple(y0), cfg)
    return _curve(n, head[:-1] + samples)


def solve_wing(n: int, R: float, cfg: SolverConfig = SolverConfig()) -> WingSolution:
    """Winglike translator through (R, 0) with a vertical tangent there."""
    if n < 2:
        raise DomainError("n must be >= 2")
    if not R > 0:
        raise DomainError("R must be positive; the R = 0 member is the bowl (solve_bowl)")
    if not cfg.r_max > R:
        raise ConstructionError(f"r_max={cfg.r_max} does not exceed R={R}")
    lower, ev = _integrate(n, 0.0, (R, 0.0, -HALF_PI), cfg, turning_event=True)
    if ev is None:
        raise ConstructionError(f"no turning point (alpha = 0) on the lower branch before r_max={cfg.r_max}")
    upper, _ = _integrate(n, 0.0, (R, 0.0, HALF_PI), cfg)
    _, R_star, V_star, _ = lower[ev]
    return WingSolution(
        n=n,
        R=float(R),
        R_star=float(R_star),
        d=float(-V_star),
        lower=_curve(n, lower),
        upper=_curve(n, upper),
    )


def graph_view(curve: ProfileCurve, r_lo: float) -> GraphProfile:
    """Restrict ``curve`` to r >= r_lo and rewrite it as a graph V(r)."""
    slack = 1e-12 * max(1.0, abs(r_lo))
    keep = curve.r >= r_lo - slack
    if keep.sum() < 2:
        raise ReparametrizationError(f"fewer than two samples with r >= {r_lo}")
    r = curve.r[keep]
    a = curve.alpha[keep]
    if not np.all(np.diff(r) > 0):
        raise ReparametrizationError("radius is not strictly increasing on the requested range")
    if np.any(np.cos(a) <= 1e-12):
        raise ReparametrizationError("vertical tangent inside the requested range")
    phi = np.tan(a)
    return GraphProfile(
        n=curve.n,
        r_grid=r.copy(),
        V=curve.V[keep].copy(),
        phi=phi,
        dphi=graph_slope_rhs(curve.n, r, phi),
    )


def _fd_weights(x0: float, xs: np.ndarray) -> np.ndarray:
    """First-derivative weights at x0 on nodes xs (Fornberg)."""
    m = xs.size
    A = np.vander(xs - x0, m, increasing=True).T
    rhs = np.zeros(m)
    rhs[1] = 1.0
    return np.linalg.solve(A, rhs)


def translator_residual(curve: ProfileCurve, stencil: int = 7) -> float:
    """sup over interior samples of the equation defects.

    The curvature defect |alpha_s + (n-1) sin(alpha)/r - cos(alpha)| is
    combined with the consistency defects |r_s - cos(alpha)| and
    |V_s - sin(alpha)|, so corrupted heights are caught as well.  Derivatives
    are centered finite differences over ``stencil`` consecutive samples (3
    gives the classical second-order formula, 7 a sixth-order one).
    Interior means a full centered stencil fits; samples on the axis are
    skipped.  Curves shorter than the stencil fall back to 3 points.
    """
    if len(curve) < 3:
        raise ValueError("need at least 3 samples")
    if stencil < 3 or stencil % 2 == 0:
        raise ValueError("stencil must be an odd integer >= 3")
    half = stencil // 2 if len(curve) >= stencil else 1
    s, r, V, a = curve.s, curve.r, curve.V, curve.alpha
    worst = 0.0
    for i in range(half, len(curve) - half):
        if r[i] <= 0:
            continue
        idx = slice(i - half, i + half + 1)
        w = _fd_weights(s[i], s[idx])
        ca, sa = math.cos(a[i]), math.sin(a[i])
        res = max(
            abs(float(w @ a[idx]) + (curve.n - 1) * sa / r[i] - ca),
            abs(float(w @ r[idx]) - ca),
            abs(float(w @ V[idx]) - sa),
        )
        worst = max(worst, res)
    return worst
