"""Exact sign certification for the candidate subsolution tau.

tau(r) = s^2/(2(n-1)) - log(1 + s^2)/2 with s = r - R*.  Its first two
derivatives are rational in s, so Psi(tau) times the positive factor
r (n-1)^2 (1+s^2)^3 is a polynomial P(r) of degree 8 with rational
coefficients once n and R* are fixed.  Everything here that decides a sign
runs on ``fractions.Fraction``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, Union

from .errors import DomainError

Number = Union[int, Fraction]

WIDTH = Fraction(1, 10**9)


def _q(x) -> Fraction:
    if isinstance(x, float):
        return Fraction(x)
    return Fraction(x)


class RationalPolynomial:
    """Dense polynomial with exact rational coefficients, lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        c = [_q(v) for v in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.coeffs = tuple(c)

    @classmethod
    def monomial(cls, k: int, c=1) -> "RationalPolynomial":
        return cls([0] * k + [c])

    @classmethod
    def x(cls) -> "RationalPolynomial":
        return cls([0, 1])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def lead(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def coeff(self, k: int) -> Fraction:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else Fraction(0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RationalPolynomial):
            other = RationalPolynomial([other])
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self) -> str:
        return f"RationalPolynomial({[str(c) for c in self.coeffs]})"

    @staticmethod
    def _lift(other) -> "RationalPolynomial":
        return other if isinstance(other, RationalPolynomial) else RationalPolynomial([other])

    def __add__(self, other):
        o = self._lift(other)
        m = max(len(self.coeffs), len(o.coeffs))
        return RationalPolynomial(self.coeff(k) + o.coeff(k) for k in range(m))

    __radd__ = __add__

    def __neg__(self):
        return RationalPolynomial(-c for c in self.coeffs)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        o = self._lift(other)
        if self.is_zero() or o.is_zero():
            return RationalPolynomial()
        out = [Fraction(0)] * (len(self.coeffs) + len(o.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(o.coeffs):
                    out[i + j] += a * b
        return RationalPolynomial(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = RationalPolynomial([1])
        for _ in range(k):
            out = out * self
        return out

    def __call__(self, x):
        """Horner evaluation; exact for int/Fraction arguments."""
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + (c if isinstance(x, (int, Fraction)) else float(c))
        return acc

    def derivative(self) -> "RationalPolynomial":
        return RationalPolynomial(k * c for k, c in enumerate(self.coeffs) if k)

    def divmod(self, other: "RationalPolynomial"):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        q = [Fraction(0)] * max(0, len(rem) - other.degree)
        while len(rem) > other.degree and any(rem):
            k = len(rem) - 1 - other.degree
            f = rem[-1] / other.lead
            q[k] = f
            for j, c in enumerate(other.coeffs):
                rem[j + k] -= f * c
            rem.pop()
        return RationalPolynomial(q), RationalPolynomial(rem)

    def monic(self) -> "RationalPolynomial":
        return self * (1 / self.lead) if self.coeffs else self

    def to_strings(self) -> List[str]:
        return [str(c) for c in self.coeffs]

    @classmethod
    def from_strings(cls, items: Sequence[str]) -> "RationalPolynomial":
        return cls(Fraction(v) for v in items)


def poly_gcd(a: RationalPolynomial, b: RationalPolynomial) -> RationalPolynomial:
    while not b.is_zero():
        a, b = b, a.divmod(b)[1]
    return a.monic()


def taylor_shift(p: RationalPolynomial, a) -> RationalPolynomial:
    """q with q(s) = p(s + a), by Horner composition with (s + a)."""
    a = _q(a)
    lin = RationalPolynomial([a, 1])
    out = RationalPolynomial()
    for c in reversed(p.coeffs):
        out = out * lin + c
    return out


def _affine(p: RationalPolynomial, lo: Fraction, width: Fraction) -> RationalPolynomial:
    """p(lo + width*x)."""
    q = taylor_shift(p, lo)
    scale = Fraction(1)
    out = []
    for c in q.coeffs:
        out.append(c * scale)
        scale *= width
    return RationalPolynomial(out)


def _variations(coeffs) -> int:
    signs = [c > 0 for c in coeffs if c != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _sign(x) -> int:
    return (x > 0) - (x < 0)


# -- root isolation ---------------------------------------------------------


def _descartes_bound(p: RationalPolynomial, lo: Fraction, hi: Fraction) -> int:
    """Sign variations of (1+x)^d p((lo + hi x)/(1 + x)); bounds the roots in (lo, hi)."""
    t = _affine(p, lo, hi - lo)
    rev = RationalPolynomial(reversed(t.coeffs + (Fraction(0),) * (p.degree - t.degree)))
    return _variations(taylor_shift(rev, 1).coeffs)


def _split_point(p, lo, hi):
    mid = (lo + hi) / 2
    k = 1
    while p(mid) == 0:
        # keep interval endpoints off the roots
        mid = lo + (hi - lo) * Fraction(2**k + 1, 2 ** (k + 1))
        k += 1
    return mid


def isolate_roots(p: RationalPolynomial, lo: Fraction, hi: Fraction) -> List[Tuple[Fraction, Fraction]]:
    """Disjoint intervals in (lo, hi), each holding exactly one root of squarefree ``p``.

    ``p`` must not vanish at ``lo`` or ``hi``.
    """
    out = []
    stack = [(lo, hi)]
    while stack:
        a, b = stack.pop()
        v = _descartes_bound(p, a, b)
        if v == 0:
            continue
        if v == 1:
            out.append((a, b))
            continue
        m = _split_point(p, a, b)
        stack.append((m, b))
        stack.append((a, m))
    return sorted(out)


def refine(p: RationalPolynomial, lo: Fraction, hi: Fraction, width: Fraction = WIDTH) -> Tuple[Fraction, Fraction]:
    """Exact bisection of a bracket with p(lo) p(hi) < 0 down to ``width``."""
    slo = _sign(p(lo))
    while hi - lo > width:
        m = (lo + hi) / 2
        sm = _sign(p(m))
        if sm == 0:
            q = (hi - lo) / 4
            return refine(p, m - q, m + q, width) if q * 2 > width else (m - q, m + q)
        if sm == slo:
            lo = m
        else:
            hi = m
    return lo, hi


def cauchy_bound(p: RationalPolynomial) -> Fraction:
    return 1 + max(abs(c / p.lead) for c in p.coeffs[:-1]) if p.degree > 0 else Fraction(1)


@dataclass(frozen=True)
class SignVerdict:
    kind: str  # nonpositive_on_ray | nonnegative_on_ray | sign_change
    bracket: Optional[Tuple[Fraction, Fraction]] = None

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.bracket is not None:
            d["bracket"] = [str(self.bracket[0]), str(self.bracket[1])]
            d["bracket_float"] = [float(self.bracket[0]), float(self.bracket[1])]
        return d


def sign_on_ray(p: RationalPolynomial, a) -> SignVerdict:
    """Sign of p on [a, oo), decided exactly.

    The zero polynomial counts as nonpositive.  A sign change comes with a
    bracket (in the original variable) of width <= 1e-9 whose endpoints have
    opposite signs under p.
    """
    a = _q(a)
    q = taylor_shift(p, a)
    if q.is_zero():
        return SignVerdict("nonpositive_on_ray")
    # sign on (0, oo) is that of q with the zero root divided out
    k = next(i for i, c in enumerate(q.coeffs) if c != 0)
    q0 = RationalPolynomial(q.coeffs[k:])
    if q0.degree == 0:
        return SignVerdict("nonpositive_on_ray" if q0.lead < 0 else "nonnegative_on_ray")
    sqf = q0.divmod(poly_gcd(q0, q0.derivative()))[0]
    B = cauchy_bound(sqf)
    roots = isolate_roots(sqf, Fraction(0), B)
    probes = [Fraction(0)] + [e for iv in roots for e in iv] + [B]
    signs = [_sign(q0(x)) for x in probes]
    if all(s <= 0 for s in signs):
        return SignVerdict("nonpositive_on_ray")
    if all(s >= 0 for s in signs):
        return SignVerdict("nonnegative_on_ray")
    for lo, hi in roots:
        if _sign(q0(lo)) != _sign(q0(hi)):
            lo, hi = refine(q0, lo, hi)
            return SignVerdict("sign_change", (lo + a, hi + a))
    raise AssertionError("sign pattern without a sign-changing root")  # pragma: no cover


def nonpositive_on_ray(p: RationalPolynomial, a) -> SignVerdict:
    return sign_on_ray(p, a)


# -- tau and the operator -----------------------------------------------------


def tau_eval(n: int, R_star, r):
    if n < 2:
        raise DomainError("n must be >= 2")
    s = r - float(R_star)
    return s * s / (2 * (n - 1)) - 0.5 * math.log1p(s * s)


def tau_functions(n: int, R_star) -> Tuple[Callable, Callable, Callable]:
    """(tau, tau', tau'') as float callables."""
    R = float(R_star)

    def d1(r):
        s = r - R
        return s / (n - 1) - s / (1 + s * s)

    def d2(r):
        s2 = (r - R) ** 2
        return 1.0 / (n - 1) - (1 - s2) / (1 + s2) ** 2

    return (lambda r: tau_eval(n, R, r)), d1, d2


def psi(n: int, f: Tuple[Callable, Callable, Callable], r: float) -> float:
    """f'' - (1 + f'^2)(1 - (n-1) f'/r)."""
    if not r > 0:
        raise DomainError("r must be positive")
    _, d1, d2 = f
    p = d1(r)
    return d2(r) - (1 + p * p) * (1 - (n - 1) * p / r)


def derive_polynomial(n: int, R_star) -> RationalPolynomial:
    """P(r) with Psi(tau)(r) <= 0 iff P(r) <= 0 for r > 0."""
    if n < 2:
        raise DomainError("n must be >= 2")
    R = _q(R_star)
    if R < 0:
        raise DomainError("R* must be >= 0")
    m = n - 1
    r = RationalPolynomial.x()
    s = r - R
    w = 1 + s * s  # 1 + s^2
    b = s * s + (2 - n)  # (n-1) tau' = s b / w
    # tau'' * D
    curv = r * m * w * (w * w - m * (1 - s * s))
    # (1 + tau'^2) (1 - (n-1) tau'/r) * D
    slope = (m * m * w * w + s * s * b * b) * (r * w - s * b)
    return curv - slope


def clearing_factor(n: int, R_star, r: float) -> float:
    s = r - float(R_star)
    return r * (n - 1) ** 2 * (1 + s * s) ** 3


def _table_c(n: int, R: Fraction) -> List[Fraction]:
    # transcribed verbatim, including the doubled R^2 monomial in c5
    return [
        R**9 + (7 - 5 * n + n**2) * R**7 + (16 - 21 * n + 9 * n**2 - n**3) * R**5
        + (13 - 24 * n + 15 * n**2 - 3 * n**3) * R**3 + (2 - 5 * n + 4 * n**2 - n**3) * R,
        8 * R**8 + (42 - 30 * n + 6 * n**2) * R**6 + (67 - 92 * n + 42 * n**2 - 5 * n**3) * R**4
        + (29 - 59 * n + 41 * n**2 - 9 * n**3) * R**2 - 1 + 2 * n**2 - n**3,
        28 * R**7 + (105 - 75 * n + 15 * n**2) * R**5
        + (108 - 158 * n + 78 * n**2 - 10 * n**3) * R**3 + (19 - 46 * n + 37 * n**2 - 9 * n**3) * R,
        56 * R**6 + 20 * (7 - 5 * n + n**2) * R**4
        + (82 - 132 * n + 72 * n**2 - 10 * n**3) * R**2 + 3 - 11 * n + 11 * n**2 - 3 * n**3,
        70 * R**5 + 15 * (7 - 5 * n + n**2) * R**3 + (28 - 53 * n + 33 * n**2 - 5 * n**3) * R,
        56 * R**2 + 6 * (7 - 5 * n + n**2) * R**2 + 3 - 8 * n + 6 * n**2 - n**3,
        (7 - 5 * n + n**2 + 28 * R**2) * R,
        8 * R**2,
        -R,
    ]


def _table_d(n: int, R: Fraction) -> List[Fraction]:
    return [
        (-2 * n**2 + 5 * n - 3) * R,
        Fraction(-(n**3) + 2 * n**2 - 1),
        (-4 * n**2 + 13 * n - 10) * R,
        Fraction(-3 * n**3 + 11 * n**2 - 11 * n + 3),
        (-3 * n**2 + 13 * n - 13) * R,
        Fraction(-(n**3) + 6 * n**2 - 8 * n + 3),
        (-(n**2) + 5 * n - 7) * R,
        Fraction(0),
        -R,
    ]


def table_coefficients(n: int, R_star, basis: str = "centered") -> List[Fraction]:
    """The two reference coefficient tables, evaluated exactly.

    ``basis="origin"`` gives c_k (powers of r), ``"centered"`` gives d_k
    (powers of r - R*).
    """
    R = _q(R_star)
    if basis == "origin":
        return [Fraction(v) for v in _table_c(n, R)]
    if basis == "centered":
        return [Fraction(v) for v in _table_d(n, R)]
    raise ValueError(f"basis must be 'origin' or 'centered', got {basis!r}")


def proportional(p: RationalPolynomial, q: RationalPolynomial) -> Optional[Fraction]:
    """Positive c with p = c q, or None."""
    if p.is_zero() or q.is_zero():
        return Fraction(1) if p.is_zero() and q.is_zero() else None
    c = p.lead / q.lead
    if c > 0 and p == q * c:
        return c
    return None


def _coeff_diff(got: RationalPolynomial, want: RationalPolynomial) -> List[dict]:
    rows = []
    for k in range(max(len(got.coeffs), len(want.coeffs))):
        g, w = got.coeff(k), want.coeff(k)
        if g != w:
            rows.append({"k": k, "table": str(g), "expected": str(w)})
    return rows


def discrepancy_report(n: int, R_star) -> dict:
    """Exact comparison of both reference tables with each other and with the derived P.

    Comparisons against the derived polynomial allow a positive constant
    factor, fixed by the leading coefficients.
    """
    R = _q(R_star)
    c = RationalPolynomial(table_coefficients(n, R, "origin"))
    d = RationalPolynomial(table_coefficients(n, R, "centered"))
    P = derive_polynomial(n, R)
    P_centered = taylor_shift(P, R)
    c_shift = taylor_shift(c, R)

    def against_derived(table, truth):
        factor = truth.lead / table.lead if table.lead else None
        scaled = table * factor if factor else table
        return {
            "factor": None if factor is None else str(factor),
            "proportional": proportional(truth, table) is not None,
            "mismatches": _coeff_diff(scaled, truth),
        }

    return {
        "n": n,
        "R_star": str(R),
        "shifted_origin_vs_centered": {"match": c_shift == d, "mismatches": _coeff_diff(c_shift, d)},
        "origin_vs_derived": against_derived(c, P),
        "centered_vs_derived": against_derived(d, P_centered),
        "derived_origin": P.to_strings(),
        "derived_centered": P_centered.to_strings(),
    }


def verify_lemmas(n_set: Iterable[int], Rstar_grid: Iterable) -> dict:
    """Sign verdict of the derived P on [R*, oo) for each (n, R*) pair."""
    grid = [_q(R) for R in Rstar_grid]
    entries, counterexamples = [], []
    for n in n_set:
        for R in grid:
            P = derive_polynomial(n, R)
            verdict = sign_on_ray(P, R)
            entry = {"n": n, "R_star": str(R), "verdict": verdict.to_dict()}
            if n >= 5:
                centered = taylor_shift(P, R)
                entry["centered_nonpositive"] = all(v <= 0 for v in centered.coeffs)
            entries.append(entry)
            if verdict.kind != "nonpositive_on_ray" or entry.get("centered_nonpositive") is False:
                counterexamples.append(entry)
    return {"entries": entries, "counterexamples": counterexamples, "all_nonpositive": not counterexamples}
