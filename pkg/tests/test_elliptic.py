import math

import numpy as np
import pytest
import scipy.special as sps
from hypothesis import given, settings, strategies as st

from dumbbell_nls.elliptic import (E_log_expansion, EllipticModulus, K_log_expansion, complete_E,
                                   complete_K, dk_dn_variation, dk_jacobi_at_1, dn_first_order,
                                   jacobi, property_suite)
from dumbbell_nls.errors import ModulusOutOfRange, QuadratureNearPole


@pytest.mark.parametrize("k", [0.1, 0.5, 0.9, 0.999, 0.999999])
def test_jacobi_matches_scipy(k):
    x = np.linspace(-15, 15, 301)
    sn, cn, dn, _ = sps.ellipj(x, k * k)
    ours = jacobi(x, k)
    for a, b in zip(ours, (sn, cn, dn)):
        np.testing.assert_allclose(a, b, atol=1e-12)


@pytest.mark.parametrize("k", [0.0, 0.3, 0.8, 0.99, 0.9999])
def test_complete_integrals_match_scipy(k):
    if k < 1:
        assert complete_K(k) == pytest.approx(sps.ellipk(k * k), rel=1e-14)
    assert complete_E(k) == pytest.approx(sps.ellipe(k * k), rel=1e-13)


def test_tiny_complement_uses_complement_directly():
    # K(k) for k' = 1e-8 via scipy's complementary parameter form ellipkm1(m1)
    m = EllipticModulus.from_complement(1e-8)
    assert complete_K(m) == pytest.approx(sps.ellipkm1(1e-16), rel=1e-13)
    assert complete_K(m) == pytest.approx(K_log_expansion(m), abs=1e-12)
    assert complete_E(m) == pytest.approx(E_log_expansion(m), abs=1e-14)


def test_limits_of_modulus():
    sn, cn, dn = jacobi(np.array([0.7]), 1.0)
    np.testing.assert_allclose([sn[0], cn[0], dn[0]], [math.tanh(0.7), 1 / math.cosh(0.7), 1 / math.cosh(0.7)])
    sn, cn, dn = jacobi(0.7, 0.0)
    assert (sn, cn, dn) == pytest.approx((math.sin(0.7), math.cos(0.7), 1.0))
    with pytest.raises(ModulusOutOfRange):
        complete_K(1.0)
    with pytest.raises(ModulusOutOfRange):
        EllipticModulus.from_k(1.5)


def test_dn_at_quarter_period_is_complement():
    for kc in (1e-3, 0.0043129497907502, 0.1):
        m = EllipticModulus.from_complement(kc)
        assert jacobi(complete_K(m), m)[2] == pytest.approx(kc, rel=1e-9)


def test_k_derivatives_at_one_against_finite_difference():
    x = np.linspace(0.1, 3.0, 7)
    step = 1e-7
    fd = (np.array(jacobi(x, 1.0)) - np.array(jacobi(x, 1.0 - step))) / step
    np.testing.assert_allclose(fd, np.array(dk_jacobi_at_1(x)), atol=1e-5)


def test_variation_formula():
    k, x, dk = 0.8, 0.9, 1e-6
    fd = (jacobi(x, k + dk)[2] - jacobi(x, k - dk)[2]) / (2 * dk)
    assert dk_dn_variation(x, k) == pytest.approx(fd, abs=1e-8)
    with pytest.raises(QuadratureNearPole):
        dk_dn_variation(complete_K(k), k)


def test_first_order_expansion_is_second_order_accurate():
    m = EllipticModulus.from_complement(1e-3)
    assert abs(jacobi(2.0, m)[2] - float(dn_first_order(2.0, m))) < 1e-10


def test_property_suite_passes():
    results = property_suite(samples=2000)
    assert {name for name, *_ in results} >= {"identity_residual", "dk_at_1_vs_finite_difference"}
    assert all(passed for *_, passed in results), results


@settings(max_examples=60, deadline=None)
@given(x=st.floats(-50, 50), k=st.floats(0.0, 1.0))
def test_jacobi_identities(x, k):
    sn, cn, dn = jacobi(x, k)
    assert abs(sn * sn + cn * cn - 1) < 1e-12
    assert abs(dn * dn + k * k * sn * sn - 1) < 1e-12
    assert dn > 0
