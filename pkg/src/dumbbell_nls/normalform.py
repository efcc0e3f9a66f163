"""Pitchfork of the constant branch: thresholds and normal-form coefficients in closed form.

The constant state p = Omega1/2 at lam0 = -Omega1^2/2 loses a direction along
the first odd eigenfunction U (sin(Omega1 x) on the segment).  Expanding in
the amplitude a of U,

    lam = lam0 + a^2 * coef + O(a^4),

with ``coef`` the normal-form coefficient computed here from explicit
trigonometric sums.  The second-order even correction solves
(-Delta - Omega1^2) phi2 = U^2; its closed form, with constants A and B fixed by
the junction conditions, is available for cross-checks against a discrete solve.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .grid import DumbbellGrid, GraphFunction, make_grid, sample
from .operators import build_laplacian
from .spectrum import even_dispersion_roots, odd_dispersion_roots, odd_eigenfunction_norm2, odd_mode_profile


def _trig(L: float, omega1: float | None = None):
    w = omega1 if omega1 is not None else odd_dispersion_roots(L, 1)[0]
    sl, cl = math.sin(L * w), math.cos(L * w)
    sp_, cp = math.sin(math.pi * w), math.cos(math.pi * w)
    return w, sl, cl, sp_, cp


def thresholds(L: float) -> tuple[float, float, float]:
    """(lam0, Q0_star, Q0_dstar): pitchfork point and the two charge thresholds of the constant branch."""
    if not L > 0:
        raise ValueError(f"L must be positive, got {L!r}")
    w1 = odd_dispersion_roots(L, 1)[0]
    v1 = even_dispersion_roots(L, 1)[0]
    return -0.5 * w1 * w1, 0.5 * (L + 2 * math.pi) * w1 * w1, 0.5 * (L + 2 * math.pi) * v1 * v1


def ab_constants(L: float, omega1: float | None = None) -> tuple[float, float]:
    """Integration constants of the even second-order correction on the segment (A) and rings (B)."""
    w, sl, cl, _, cp = _trig(L, omega1)
    return cl ** 3 / (2 * w * w), -(sl * cl) ** 2 / (2 * w * w * cp)


def solvability_rhs(L: float, omega1: float | None = None) -> float:
    """9 Omega1^2 <U^2, phi2> + ||U||_4^4 as an explicit sum of three negative terms."""
    w, sl, cl, _, cp = _trig(L, omega1)
    return (-3 * L * (1 - math.sin(2 * L * w) / (2 * L * w))
            - 6 * math.pi * sl ** 4 / cp ** 4
            - 3 * sl ** 3 * cl * (1 + 2 * cl * cl) / (w * cp * cp))


def omega_coefficient(L: float) -> tuple[float, float, float]:
    """(coef, A, B) with coef = solvability_rhs / ||U||^2 the cubic normal-form coefficient."""
    w = odd_dispersion_roots(L, 1)[0]
    A, B = ab_constants(L, w)
    return solvability_rhs(L, w) / odd_eigenfunction_norm2(L, w), A, B


@dataclass(frozen=True)
class SlopeSum:
    """Parts of (L+2pi)(9 Omega1^2 <U^2, phi2> + ||U||_4^4) + 2||U||^4, whose sign decides dQ/da^2."""

    I: float
    II: float
    III: float

    @property
    def total(self) -> float:
        return self.I + self.II + self.III


def slope_sum(L: float) -> SlopeSum:
    w, sl, cl, _, cp = _trig(L)
    r2 = sl * sl / (cp * cp)
    tot = L + 2 * math.pi
    part1 = -3 * tot * (0.75 * L + 2 * math.pi * r2 * r2) + 2 * (L + 2 * math.pi * r2) ** 2
    part2 = -0.75 * tot * L * (1 - math.sin(2 * L * w) / (2 * L * w))
    part3 = -3 * tot * sl * cl / w * (r2 * (1 + 2 * cl * cl) - 0.75)
    return SlopeSum(part1, part2, part3)


def slope_sum_direct(L: float) -> float:
    """The same quantity before regrouping: (L+2pi) * solvability_rhs + 2 ||U||^4."""
    w = odd_dispersion_roots(L, 1)[0]
    return (L + 2 * math.pi) * solvability_rhs(L, w) + 2 * odd_eigenfunction_norm2(L, w) ** 2


def expanded_first_part(L: float) -> float:
    """First part of the slope sum after expanding brackets: a sum of manifestly negative terms."""
    w, sl, _, _, cp = _trig(L)
    x = sl / cp
    return -0.25 * L * L - 0.5 * math.pi * L * quartic_bound_poly(x) - 4 * math.pi ** 2 * x ** 4


def quartic_bound_poly(x):
    """f(x) = 9 - 16 x^2 + 12 x^4, bounded below by 11/3."""
    return 9 - 16 * x ** 2 + 12 * x ** 4


def g_direct(L: float) -> float:
    """sin^2(L w)/cos^2(pi w) (1 + 2cos^2(L w)) - 3/4 at w = Omega1."""
    _, sl, cl, _, cp = _trig(L)
    return sl * sl / (cp * cp) * (1 + 2 * cl * cl) - 0.75


def g_factored(L: float) -> float:
    """(1/4)(1 - cos^2(L w))(1 + 6cos^2(L w)), equal to :func:`g_direct` on the odd relation."""
    _, _, cl, _, _ = _trig(L)
    return 0.25 * (1 - cl * cl) * (1 + 6 * cl * cl)


def ab_constraint_residual(L: float) -> float:
    """sin(L w) A + 2 sin(pi w) B, zero by the odd dispersion relation."""
    w, sl, _, sp_, _ = _trig(L)
    A, B = ab_constants(L, w)
    return sl * A + 2 * sp_ * B


def norm_identity_residual(L: float) -> float:
    """1 - sin^2(L w)/cos^2(pi w) - (3/4)cos^2(L w), zero by the odd dispersion relation."""
    _, sl, cl, _, cp = _trig(L)
    return 1 - sl * sl / (cp * cp) - 0.75 * cl * cl


def ab_first_equation_residual(L: float) -> float:
    """Residual of the continuity row of the linear system fixing A and B."""
    w, sl, cl, _, cp = _trig(L)
    A, B = ab_constants(L, w)
    r2 = sl * sl / (cp * cp)
    rhs = (3 + math.cos(2 * L * w) + r2 * (math.cos(2 * math.pi * w) - 3)) / (6 * w * w)
    return cl * A - cp * B - rhs


# ---------------------------------------------------------------------------
# second-order correction
# ---------------------------------------------------------------------------
def second_order_profile(L: float):
    """f(x, edge) of the even solution of (-Delta - Omega1^2) phi2 = U^2 orthogonal to U."""
    w, sl, _, _, cp = _trig(L)
    A, B = ab_constants(L, w)
    c_ring = sl * sl / (6 * w * w * cp * cp)

    def f(x, edge):
        x = np.asarray(x, dtype=float)
        if edge == "segment":
            return A * np.cos(w * x) - (np.cos(2 * w * x) + 3) / (6 * w * w)
        y = x - L - math.pi if edge == "ring_plus" else -x - L - math.pi
        return B * np.cos(w * y) + c_ring * (np.cos(2 * w * y) - 3)
    return f


def discrete_second_order(grid: DumbbellGrid) -> tuple[GraphFunction, float]:
    """Discrete phi2 from the bordered system [A - w^2, W U; U^T W, 0].

    Uses the sampled U and the analytic Omega1; the multiplier absorbs the
    O(h^2) inconsistency of the right-hand side.  Returns (phi2, 9 w^2 <U^2, phi2> + ||U||_4^4).
    """
    L = grid.L
    w = odd_dispersion_roots(L, 1)[0]
    U = sample(grid, odd_mode_profile(L, w)).values
    wts = grid.weights()
    D = grid.size
    op = build_laplacian(grid).matrix - w * w * sp.identity(D)
    col = sp.csr_matrix((wts * U).reshape(-1, 1))
    K = sp.bmat([[op, col], [col.T, None]]).tocsc()
    rhs = np.concatenate([U * U, [0.0]])
    sol = spla.spsolve(K, rhs)
    phi2 = sol[:D]
    val = 9 * w * w * float(np.sum(wts * U * U * phi2)) + float(np.sum(wts * U ** 4))
    return GraphFunction(grid, phi2), val


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class PitchforkReport:
    L: float
    Omega1: float
    omega1: float
    Lambda0: float
    Q0_star: float
    Q0_dstar: float
    Omega_coef: float
    A: float
    B: float
    slope: SlopeSum
    norm2: float

    @property
    def eig_coef(self) -> float:
        """Coefficient of a^2 in the small L+ eigenvalue on the asymmetric branch."""
        return -2.0 * self.Omega_coef

    @property
    def charge_coef(self) -> float:
        """Q - Q0_star = charge_coef * a^2 + O(a^3)."""
        return -(self.Omega_coef * (self.L + 2 * math.pi) + 2 * self.norm2)

    def amplitude_squared(self, lam: float) -> float:
        return (lam - self.Lambda0) / self.Omega_coef

    def predicted_charge(self, lam: float) -> float:
        return self.Q0_star + self.charge_coef * self.amplitude_squared(lam)

    def predicted_eigenvalue(self, lam: float) -> float:
        return self.eig_coef * self.amplitude_squared(lam)

    def as_dict(self) -> dict:
        return {"L": self.L, "Omega1": self.Omega1, "omega1": self.omega1, "Lambda0": self.Lambda0,
                "Q0_star": self.Q0_star, "Q0_dstar": self.Q0_dstar, "Omega_coef": self.Omega_coef,
                "A": self.A, "B": self.B, "eig_coef": self.eig_coef, "slope_I": self.slope.I,
                "slope_II": self.slope.II, "slope_III": self.slope.III, "slope_sum": self.slope.total}


def pitchfork_report(L: float) -> PitchforkReport:
    if not L > 0:
        raise ValueError(f"L must be positive, got {L!r}")
    lam0, q1, q2 = thresholds(L)
    coef, A, B = omega_coefficient(L)
    w1 = odd_dispersion_roots(L, 1)[0]
    v1 = even_dispersion_roots(L, 1)[0]
    return PitchforkReport(L, w1, v1, lam0, q1, q2, coef, A, B, slope_sum(L),
                           odd_eigenfunction_norm2(L, w1))


__all__ = ["PitchforkReport", "SlopeSum", "ab_constants", "ab_constraint_residual",
           "ab_first_equation_residual", "discrete_second_order", "expanded_first_part",
           "g_direct", "g_factored", "make_grid", "norm_identity_residual", "omega_coefficient",
           "pitchfork_report", "quartic_bound_poly", "second_order_profile", "slope_sum",
           "slope_sum_direct", "solvability_rhs", "thresholds"]
