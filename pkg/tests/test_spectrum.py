import math

import numpy as np
import pytest

from dumbbell_nls import make_grid
from dumbbell_nls.errors import BracketingFailure
from dumbbell_nls.spectrum import (detect_resonance, even_dispersion_roots, even_form,
                                   odd_dispersion_roots, odd_eigenfunction,
                                   odd_eigenfunction_norm2, odd_form, rational_multiple_of_pi,
                                   spectrum_report)

# independent high-precision roots (mpmath findroot on the pole-free relations, 30 digits)
ORACLE = {
    math.pi / 2: ([0.26772047280123001075, 1.0], [0.73227952719876998925, 1.2677204728012300107]),
    math.pi: ([0.19591327601530363509, 0.80408672398469636491], [0.5, 1.0]),
    2 * math.pi: ([0.13386023640061500537, 0.5], [0.30408672398469636491, 0.69591327601530363509]),
}


@pytest.mark.parametrize("L", list(ORACLE))
def test_roots_match_oracle(L):
    odd, even = ORACLE[L]
    np.testing.assert_allclose(odd_dispersion_roots(L, 2), odd, rtol=0, atol=1e-13)
    np.testing.assert_allclose(even_dispersion_roots(L, 2), even, rtol=0, atol=1e-13)


def test_extreme_lengths():
    assert odd_dispersion_roots(1e-3, 1)[0] == pytest.approx(0.49968189270663454356, abs=1e-12)
    assert odd_dispersion_roots(100.0, 1)[0] == pytest.approx(0.014781225559408599426, abs=1e-14)


@pytest.mark.parametrize("L", [0.3, 1.0, math.pi / 2, 2.5, 7.0])
def test_residuals_vanish(L):
    rep = spectrum_report(L, 5)
    assert max(rep.residuals["even"] + rep.residuals["odd"]) < 1e-12
    assert all(abs(even_form(w, L)) < 1e-12 for w in rep.even_roots)
    assert all(abs(odd_form(w, L)) < 1e-12 for w in rep.odd_roots)
    assert np.all(np.diff(rep.even_roots) > 0) and np.all(np.diff(rep.odd_roots) > 0)


@pytest.mark.parametrize("L", [0.3, 1.0, 2.0, 4.0, 9.0])
def test_root_orderings(L):
    assert spectrum_report(L, 3).orderings_hold()


def test_resonances():
    res = detect_resonance(math.pi / 2)
    assert (res.m, res.n, res.kind) == (1, 1, "odd")
    res = detect_resonance(2 * math.pi)
    assert (res.m, res.n, res.kind) == (4, 1, "even")
    assert detect_resonance(1.0) is None


@pytest.mark.parametrize("L", [math.pi / 2, 2 * math.pi])
def test_resonant_eigenfunction_is_discrete_eigenvector(L):
    from dumbbell_nls.operators import build_laplacian
    grid = make_grid(L, 128)
    res = detect_resonance(L)
    f = res.eigenfunction(grid)
    lap = build_laplacian(grid)
    rq = float(np.sum(grid.weights() * f.values * lap.apply(f))) / f.norm() ** 2
    assert rq == pytest.approx(res.eigenvalue, rel=1e-3)


def test_eigenvalue_list_counts_ring_doubles():
    vals = spectrum_report(math.pi, 4).eigenvalues(8)
    assert vals[0] == 0.0
    assert vals.count(1.0) >= 2


def test_odd_eigenfunction_norm():
    L = math.pi / 2
    grid = make_grid(L, 256)
    f = odd_eigenfunction(L, grid)
    assert f.norm() ** 2 == pytest.approx(odd_eigenfunction_norm2(L), rel=1e-4)
    assert odd_eigenfunction_norm2(L) == pytest.approx(3.9269908169872415481, rel=1e-13)
    np.testing.assert_allclose(f.values, -f.values[grid.reflection()], atol=1e-12)


def test_rational_multiple():
    assert rational_multiple_of_pi(3 * math.pi / 4) == 0.75
    assert rational_multiple_of_pi(1.0) is None


def test_bad_count():
    with pytest.raises((ValueError, BracketingFailure)):
        odd_dispersion_roots(1.0, 0)


def test_long_segment_limit_converges_like_inverse_length():
    gaps = []
    for L in (100.0, 1000.0, 10000.0):
        w = odd_dispersion_roots(L, 1)[0]
        gap = math.pi - 2 * L * w
        # small-root expansion of the odd relation: pi - 2 L w ~ 2 pi^2 / (L + 2 pi)
        assert gap * (L + 2 * math.pi) / (2 * math.pi ** 2) == pytest.approx(1.0, rel=1e-2)
        gaps.append(gap)
    assert gaps[0] > gaps[1] > gaps[2] > 0
    assert gaps[2] < 1e-2 * math.pi
