import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import bowl, wing
from translators.asymptotics import constant_estimate, end_graphs, end_separation, estimate_constant
from translators.errors import FitError
from translators.profile_ode import GraphProfile, graph_view

# frozen from tests/oracles.py (DOP853 fit on a dense sampling)
C_PLUS_2_1 = 0.6063102425922484
C_MINUS_2_1 = -4.782253432483305


def synthetic(n, C, K, r0=1.0, r1=1000.0, m=4000):
    r = np.geomspace(r0, r1, m)
    V = r * r / (2 * (n - 1)) - np.log(r) + C + K / r
    phi = r / (n - 1) - 1 / r - K / r**2
    dphi = 1 / (n - 1) + 1 / r**2 + 2 * K / r**3
    return GraphProfile(n, r, V, phi, dphi)


def test_synthetic_model_class():
    fit = estimate_constant(synthetic(2, 7.0, 3.0), (50, 500))
    assert fit.C == pytest.approx(7.0, abs=1e-9)
    assert fit.K == pytest.approx(3.0, abs=1e-9)
    assert fit.slope == pytest.approx(-1.0, abs=1e-9)
    assert not fit.model_mismatch


@settings(max_examples=30, deadline=None)
@given(n=st.integers(2, 8), C=st.floats(-50, 50), K=st.floats(0.1, 50))
def test_synthetic_recovery_property(n, C, K):
    fit = estimate_constant(synthetic(n, C, K), (20, 800))
    assert fit.C == pytest.approx(C, abs=1e-9)
    assert fit.K == pytest.approx(K, abs=1e-9 * max(1, K))


def test_window_rules():
    g = synthetic(2, 0.0, 1.0)
    with pytest.raises(FitError):
        estimate_constant(g, (100, 500))  # under a decade
    with pytest.raises(FitError):
        estimate_constant(g, (5, 500), R_star=1.0)  # starts below 10 (R* + 1)
    with pytest.raises(FitError):
        estimate_constant(g, (50, 5000))
    with pytest.raises(FitError):
        estimate_constant(g, (500, 50))


def test_wrong_dimension_is_a_mismatch():
    g = graph_view(bowl(3, r_max=600.0), 0.0)
    wrong = GraphProfile(2, g.r_grid, g.V, g.phi, g.dphi)
    fit = estimate_constant(wrong, (50, 500))
    assert fit.model_mismatch
    assert not estimate_constant(g, (50, 500)).model_mismatch


def test_constant_estimate_formula():
    g = synthetic(3, 2.0, 0.0)
    r = np.array([10.0, 100.0])
    np.testing.assert_allclose(constant_estimate(g, r), [2.0, 2.0], atol=1e-10)


def test_wing_constants_golden():
    w = wing(2, 1.0, r_max=500.0)
    up, lo = end_graphs(w)
    fp = estimate_constant(up, (50, 500), R_star=w.R_star)
    fm = estimate_constant(lo, (50, 500), R_star=w.R_star)
    assert fp.C == pytest.approx(C_PLUS_2_1, abs=1e-4)
    assert fm.C == pytest.approx(C_MINUS_2_1, abs=1e-4)
    Cp, Cm, delta = end_separation(w, (50, 500))
    assert (Cp, Cm) == (fp.C, fm.C) and delta == Cp - Cm


@pytest.mark.xfail(strict=True, reason="measured remainder decays like r^-2, not r^-1")
def test_wing_remainder_slope():
    w = wing(2, 1.0, r_max=500.0)
    up, _ = end_graphs(w)
    fit = estimate_constant(up, (50, 500), R_star=w.R_star)
    assert -1.15 <= fit.slope <= -0.85


def test_end_separation_stable_across_windows():
    w = wing(2, 1.0, r_max=500.0)
    a = end_separation(w, (50, 200), min_decades=0.3)
    b = end_separation(w, (200, 500), min_decades=0.3)
    assert abs(a[2] - b[2]) < 1e-3
    assert abs(a[0] - b[0]) < 1e-3 and abs(a[1] - b[1]) < 1e-3


def test_bowl_constant_finite():
    g = graph_view(bowl(2, r_max=500.0), 0.0)
    fit = estimate_constant(g, (50, 500), R_star=0.0)
    assert math.isfinite(fit.C) and fit.slope < 0
    assert not fit.model_mismatch


def test_bowl_has_no_separation():
    with pytest.raises(FitError):
        end_separation(bowl(2), (50, 500))


def test_separation_table():
    # the dependence on R is recorded, not asserted
    rows = []
    for R in (0.5, 1.0, 2.0, 4.0):
        w = wing(2, R, r_max=200.0)
        rows.append((R, end_separation(w, (70, 200), min_decades=0.4)[2]))
    print("R  C+ - C-:", rows)
    assert all(math.isfinite(d) for _, d in rows)


def test_fit_serializes():
    d = estimate_constant(synthetic(2, 1.0, 1.0), (50, 500)).to_dict()
    assert d["window"] == [50.0, 500.0] and set(d) >= {"C", "K", "slope", "points"}
