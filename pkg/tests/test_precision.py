import math

import mpmath as mp
import numpy as np
import pytest
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from dumbbell_nls import make_grid
from dumbbell_nls.operators import build_laplacian
from dumbbell_nls.precision import (MPOperator, charge_excess, lattice_soliton_charge, polish_state,
                                    smallest_magnitude_eigenvalue)
from dumbbell_nls.solve import gaussian_seed, hybrid


@pytest.mark.parametrize("L, N", [(math.pi / 2, 16), (math.pi / 8, 16), (math.pi / 4, 4), (2 * math.pi, 8)])
def test_chain_solver_matches_sparse_lu(L, N):
    g = make_grid(L, N)
    rng = np.random.default_rng(0)
    pot = rng.uniform(0.5, 2.0, g.size)
    b = rng.normal(size=g.size)
    ref = spla.spsolve((build_laplacian(g).matrix + sp.diags(pot)).tocsc(), b)
    with mp.workdps(30):
        op = MPOperator(g, pot)
        x = np.array([float(v) for v in op.solve([mp.mpf(v) for v in b])])
        back = np.array([float(v) for v in op.apply([mp.mpf(v) for v in x])])
    np.testing.assert_allclose(x, ref, rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(back, b, atol=1e-10)


def test_polish_reaches_multiprecision_residual():
    g = make_grid(math.pi / 2, 32)
    st = hybrid(gaussian_seed(g, -9.0, "segment"), -9.0, spectra=False)
    _, res = polish_state(st.phi, -9.0, dps=40)
    assert res < mp.mpf(10) ** -30


def test_inverse_iteration_finds_eigenvalue_nearest_zero():
    g = make_grid(math.pi, 16)
    shift = -0.3  # -Delta - 0.3 has its eigenvalue nearest zero at Omega1^2 - 0.3 or -0.3
    vals = np.linalg.eigvals(build_laplacian(g).dense() + shift * np.eye(g.size)).real
    want = vals[np.argmin(np.abs(vals))]
    start = np.random.default_rng(2).normal(size=g.size)
    val, _ = smallest_magnitude_eigenvalue(g, [shift] * g.size, start, dps=30, iters=60)
    assert float(val) == pytest.approx(want, rel=1e-10)


def test_lattice_soliton_charge_tends_to_continuum():
    lam = -4.0
    errs = [float(lattice_soliton_charge(h, lam, dps=30)) - 4.0 for h in (0.1, 0.05)]
    assert abs(errs[1]) < 1e-2
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)


def test_charge_excess_is_resolution_independent():
    lam = -16.0
    vals = []
    for N in (64, 128):
        g = make_grid(math.pi / 2, N)
        vals.append(charge_excess(hybrid(gaussian_seed(g, lam, "segment"), lam, spectra=False).phi, lam))
    assert vals[0] < 0 and vals[1] < 0
    assert vals[0] == pytest.approx(vals[1], rel=0.02)
