import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import bowl
from oracles import sympy_polynomial, synthetic_shift
from translators.errors import DomainError
from translators.profile_ode import graph_view
from translators.subsolution import (
    RationalPolynomial,
    clearing_factor,
    derive_polynomial,
    discrepancy_report,
    isolate_roots,
    nonpositive_on_ray,
    table_coefficients,
    poly_gcd,
    psi,
    sign_on_ray,
    taylor_shift,
    tau_eval,
    tau_functions,
    verify_lemmas,
)

F = Fraction
QUARTIC_ROOT = math.sqrt((-1 + math.sqrt(13)) / 6)

rationals = st.fractions(min_value=-20, max_value=20, max_denominator=50)
polys = st.lists(rationals, min_size=0, max_size=9).map(RationalPolynomial)


def test_rational_polynomial_basics():
    x = RationalPolynomial.x()
    p = (x - 1) * (x + 2)
    assert list(p.coeffs) == [F(-2), F(1), F(1)]
    assert p(F(1)) == 0 and p.degree == 2 and p.lead == 1
    q, r = p.divmod(x - 1)
    assert q == x + 2 and r.is_zero()
    assert RationalPolynomial([1, 2, 0, 0]).degree == 1
    assert RationalPolynomial.from_strings(p.to_strings()) == p
    assert poly_gcd(p, (x - 1) ** 2).monic() == x - 1


def test_taylor_shift_examples():
    x = RationalPolynomial.x()
    assert list(taylor_shift(x * x, 1).coeffs) == [1, 2, 1]
    p = RationalPolynomial([F(3), F(-1, 2), F(0), F(7, 3)])
    assert taylor_shift(taylor_shift(p, F(5, 7)), F(-5, 7)) == p


@given(p=polys, a=rationals)
def test_taylor_shift_matches_synthetic_division(p, a):
    q = taylor_shift(p, a)
    want = synthetic_shift(p.coeffs, a) if p.coeffs else []
    assert q == RationalPolynomial(want)


@given(p=polys, a=rationals, pts=st.lists(rationals, min_size=20, max_size=20))
def test_taylor_shift_pointwise(p, a, pts):
    q = taylor_shift(p, a)
    for t in pts:
        assert q(t) == p(t + a)


def test_tau_examples():
    assert tau_eval(3, F(2), 2.0) == 0.0
    _, d1, d2 = tau_functions(4, F(3, 2))
    assert d1(1.5) == 0.0
    assert tau_eval(2, 0, 1.0) == pytest.approx(0.5 - math.log(2) / 2)
    assert tau_eval(2, 0, 1.0) == pytest.approx(0.1534, abs=1e-4)
    with pytest.raises(DomainError):
        tau_eval(1, 0, 1.0)


def test_psi_examples():
    const = (lambda r: 1.0, lambda r: 0.0, lambda r: 0.0)
    assert psi(3, const, 2.5) == -1.0
    for n in (2, 3, 7):
        R = 1.5
        assert psi(n, tau_functions(n, R), R) == pytest.approx(1 / (n - 1) - 2)
    with pytest.raises(DomainError):
        psi(2, const, 0.0)


def test_psi_vanishes_on_solution():
    g = graph_view(bowl(2), 0.0)
    f = (g.V_at, g.phi_at, g.dphi_at)
    vals = [psi(2, f, r) for r in np.linspace(0.5, 50, 40)]
    assert max(abs(v) for v in vals) < 1e-9


@pytest.mark.parametrize("n,R", [(2, F(0)), (2, F(1)), (3, F(2)), (5, F(1)), (7, F(5, 2)), (10, F(10))])
def test_derived_matches_sympy(n, R):
    assert derive_polynomial(n, R) == RationalPolynomial(sympy_polynomial(n, R))


@pytest.mark.parametrize("n,R", [(2, F(0)), (3, F(1, 2)), (5, F(1)), (8, F(4))])
def test_sign_equivalence_audit(n, R):
    P = derive_polynomial(n, R)
    fns = tau_functions(n, R)
    rng = random.Random(n)
    for _ in range(100):
        r = float(R) + 50 * rng.random() + 1e-6
        a = float(P(F(r)))
        b = psi(n, fns, r) * clearing_factor(n, R, r)
        assert clearing_factor(n, R, r) > 0
        assert a == pytest.approx(b, rel=1e-8, abs=1e-8 * max(1.0, abs(a)))
        if abs(a) > 1e-6 * max(1, abs(b)):
            assert np.sign(a) == np.sign(b)


def test_d_table_examples():
    assert table_coefficients(5, 1) == [-28, -76, -45, -152, -23, -12, -7, 0, -1]
    d = table_coefficients(2, 1)
    assert d[3] == 1 and d[5] == 3
    for n in (2, 4, 9):
        for R in (F(0), F(3, 2), F(7)):
            d = table_coefficients(n, R)
            assert d[7] == 0 and d[8] == -R


def test_d_table_matches_derived():
    for n in range(2, 11):
        for R in (F(0), F(1, 2), F(3)):
            assert taylor_shift(derive_polynomial(n, R), R) == RationalPolynomial(table_coefficients(n, R))


def test_c_table_discrepancies_recorded():
    rep = discrepancy_report(5, F(2))
    assert not rep["shifted_origin_vs_centered"]["match"]
    assert rep["centered_vs_derived"]["proportional"]
    assert not rep["origin_vs_derived"]["proportional"]
    bad = {row["k"] for row in rep["origin_vs_derived"]["mismatches"]}
    assert bad == {0, 2, 4, 5, 6}
    # R* = 1 hides the doubled-monomial slip in the r^5 coefficient
    bad1 = {row["k"] for row in discrepancy_report(5, F(1))["origin_vs_derived"]["mismatches"]}
    assert 5 not in bad1


def test_c_table_after_repair_matches():
    n, R = 4, F(3)
    c = table_coefficients(n, R, "origin")
    fixed = [-v if k in (0, 2, 4, 6) else v for k, v in enumerate(c)]
    fixed[5] += 56 * R**4 - 56 * R**2
    assert RationalPolynomial(fixed) == derive_polynomial(n, R)


def test_sign_on_ray_examples():
    x = RationalPolynomial.x()
    assert nonpositive_on_ray(-(x - 3), 3).kind == "nonpositive_on_ray"
    v = sign_on_ray((x - 2) ** 2 - 1, 2)
    assert v.kind == "sign_change" and v.bracket[0] <= 3 <= v.bracket[1]
    assert sign_on_ray(x * x, 0).kind == "nonnegative_on_ray"
    assert sign_on_ray(RationalPolynomial(), 5).kind == "nonpositive_on_ray"
    # a double root does not change sign
    assert sign_on_ray(-((x - 4) ** 2), 0).kind == "nonpositive_on_ray"


def test_n2_origin_sign_change():
    v = sign_on_ray(derive_polynomial(2, 0), 0)
    assert v.kind == "sign_change"
    lo, hi = v.bracket
    assert hi - lo <= F(1, 10**9)
    assert lo <= F(QUARTIC_ROOT) <= hi
    P = derive_polynomial(2, 0)
    assert P(lo) * P(hi) < 0


@pytest.mark.parametrize("n", range(5, 11))
def test_lemma_high_dimensions(n):
    grid = [F(k, 2) for k in range(0, 21)]
    rep = verify_lemmas([n], grid)
    assert rep["all_nonpositive"], rep["counterexamples"][:1]
    assert all(e["centered_nonpositive"] for e in rep["entries"])


def test_lemma_low_dimensions_at_two():
    rep = verify_lemmas([2, 3, 4], [F(2)])
    assert rep["all_nonpositive"]


def test_lemma_counterexample_reported():
    rep = verify_lemmas([2], [F(0)])
    assert not rep["all_nonpositive"]
    assert rep["counterexamples"][0]["verdict"]["kind"] == "sign_change"


@settings(max_examples=40, deadline=None)
@given(roots=st.lists(st.fractions(min_value=F(1, 10), max_value=20, max_denominator=30), min_size=1, max_size=5, unique=True))
def test_isolation_finds_every_root(roots):
    x = RationalPolynomial.x()
    p = RationalPolynomial([1])
    for r in roots:
        p = p * (x - r)
    ivs = isolate_roots(p, F(0), F(21))
    assert len(ivs) == len(roots)
    for r in roots:
        assert sum(lo <= r <= hi for lo, hi in ivs) == 1


@settings(max_examples=60, deadline=None)
@given(p=polys, a=rationals)
def test_sign_change_brackets_are_sound(p, a):
    v = sign_on_ray(p, a)
    if v.kind == "sign_change":
        lo, hi = v.bracket
        assert a <= lo < hi and hi - lo <= F(1, 10**9)
        assert p(lo) * p(hi) < 0
    else:
        probes = [a + F(k, 3) for k in range(60)]
        vals = [p(t) for t in probes]
        if v.kind == "nonpositive_on_ray":
            assert all(t <= 0 for t in vals)
        else:
            assert all(t >= 0 for t in vals)
