import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from dumbbell_nls import make_grid, sample
from dumbbell_nls.normalform import (ab_constants, ab_constraint_residual,
                                     ab_first_equation_residual, discrete_second_order,
                                     expanded_first_part, g_direct, g_factored,
                                     norm_identity_residual, omega_coefficient, pitchfork_report,
                                     quartic_bound_poly, second_order_profile, slope_sum,
                                     slope_sum_direct, solvability_rhs, thresholds)
from dumbbell_nls.spectrum import odd_dispersion_roots, odd_eigenfunction_norm2, odd_mode_profile

# coefficient, A, B from mpmath: phi2 solved independently (junction system by findroot,
# inner products by quadrature), 30 digits
ORACLE = {
    math.pi / 2: (-1.875, None, None),
    1.0: (-1.55076957686324367, 4.3068069235342528, -0.798843081738305908),
    2 * math.pi: (-2.87570701313056381, 8.2678588156868933, -7.54748795936609835),
}


@pytest.mark.parametrize("L", list(ORACLE))
def test_coefficient_matches_oracle(L):
    coef, A, B = omega_coefficient(L)
    want, want_A, want_B = ORACLE[L]
    assert coef == pytest.approx(want, rel=1e-12)
    if want_A is not None:
        assert (A, B) == pytest.approx((want_A, want_B), rel=1e-12)


def test_thresholds():
    lam0, q1, q2 = thresholds(math.pi / 2)
    w = 0.26772047280123001075
    assert lam0 == pytest.approx(-0.5 * w * w, rel=1e-13)
    assert q1 == pytest.approx(0.5 * (math.pi / 2 + 2 * math.pi) * w * w, rel=1e-13)
    assert q2 > q1
    with pytest.raises(ValueError):
        thresholds(-1.0)


def test_solvability_rhs_by_quadrature():
    L = 1.3
    w = odd_dispersion_roots(L, 1)[0]
    U = odd_mode_profile(L, w)
    phi2 = second_order_profile(L)

    def integral(edge, a, b, f):
        return quad(lambda x: f(np.array([x]), edge)[0], a, b, epsabs=1e-13, epsrel=1e-13)[0]

    edges = [("ring_minus", -L - 2 * math.pi, -L), ("segment", -L, L), ("ring_plus", L, L + 2 * math.pi)]
    inner = sum(integral(e, a, b, lambda x, e: U(x, e) ** 2 * phi2(x, e)) for e, a, b in edges)
    l4 = sum(integral(e, a, b, lambda x, e: U(x, e) ** 4) for e, a, b in edges)
    assert solvability_rhs(L) == pytest.approx(9 * w * w * inner + l4, rel=1e-10)


def test_second_order_profile_solves_junction_conditions():
    L = 1.3
    f = second_order_profile(L)
    eps = 1e-6
    d = lambda edge, x: (f(x + eps, edge) - f(x - eps, edge)) / (2 * eps)
    assert f(L, "segment") == pytest.approx(f(L, "ring_plus"), abs=1e-12)
    assert f(L, "segment") == pytest.approx(f(L + 2 * math.pi, "ring_plus"), abs=1e-12)
    flux = d("ring_plus", L) - d("ring_plus", L + 2 * math.pi) - d("segment", L)
    assert abs(flux) < 1e-7
    assert abs(ab_first_equation_residual(L)) < 1e-12


def test_discrete_second_order_converges_at_second_order():
    L = math.pi / 2
    errs = []
    for N in (32, 64, 128):
        grid = make_grid(L, N)
        phi2, val = discrete_second_order(grid)
        ref = sample(grid, second_order_profile(L)).values
        errs.append(float(np.max(np.abs(phi2.values - ref))))
        assert val == pytest.approx(solvability_rhs(L), rel=20 * grid.h ** 2)
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all((orders > 1.8) & (orders < 2.2))


@pytest.mark.parametrize("L", [0.2, 1.0, math.pi / 2, 5.0, 20.0])
def test_slope_regrouping_and_signs(L):
    parts = slope_sum(L)
    assert parts.total == pytest.approx(slope_sum_direct(L), rel=1e-12)
    assert parts.I < 0 and parts.II < 0 and parts.III < 0
    assert expanded_first_part(L) == pytest.approx(parts.I, rel=1e-12)
    assert g_direct(L) == pytest.approx(g_factored(L), abs=1e-12)
    assert g_factored(L) > 0


def test_report_consistency():
    rep = pitchfork_report(math.pi / 2)
    assert rep.eig_coef == pytest.approx(-2 * rep.Omega_coef) and rep.eig_coef > 0
    assert rep.charge_coef > 0
    assert rep.norm2 == pytest.approx(odd_eigenfunction_norm2(math.pi / 2))
    lam = rep.Lambda0 - 0.01
    assert rep.amplitude_squared(lam) > 0
    assert rep.predicted_charge(lam) > rep.Q0_star
    assert set(rep.as_dict()) >= {"Omega_coef", "slope_sum", "Lambda0"}
    with pytest.raises(ValueError):
        pitchfork_report(0.0)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 40.0))
def test_identities_hold(L):
    assert abs(ab_constraint_residual(L)) < 1e-11
    assert abs(norm_identity_residual(L)) < 1e-11
    assert omega_coefficient(L)[0] < 0
    assert slope_sum(L).total < 0


@settings(max_examples=60, deadline=None)
@given(st.floats(-10.0, 10.0))
def test_quartic_bound(x):
    assert quartic_bound_poly(x) >= 11 / 3 - 1e-12
    assert ab_constants(1.0)[0] > 0
