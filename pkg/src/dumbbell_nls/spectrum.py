"""Analytic spectrum of the Kirchhoff Laplacian on the dumbbell.

Eigenvalues of -Delta are 0, the squares n^2 (each double, carried by the
rings), and the squares of the positive roots of two transcendental relations:

    even:  2 tan(w pi) + tan(w L) = 0
    odd:   2 tan(w pi) - cot(w L) = 0

Roots are computed on pole-free forms obtained by clearing denominators.
Between consecutive points of the lattice {j/2} u {j pi / (2L)} both tangent
factors are continuous and monotone, so each lattice cell holds at most one
root and a sign change of the pole-free form brackets it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq

from .errors import BracketingFailure
from .grid import DumbbellGrid, GraphFunction, sample


def even_form(w, L):
    """2 sin(w pi) cos(w L) + cos(w pi) sin(w L)."""
    return 2.0 * np.sin(w * np.pi) * np.cos(w * L) + np.cos(w * np.pi) * np.sin(w * L)


def odd_form(w, L):
    """2 sin(w pi) sin(w L) - cos(w pi) cos(w L)."""
    return 2.0 * np.sin(w * np.pi) * np.sin(w * L) - np.cos(w * np.pi) * np.cos(w * L)


def even_residual(w, L):
    """|2 tan(w pi) + tan(w L)|; meaningful away from the poles."""
    return abs(2.0 * math.tan(w * math.pi) + math.tan(w * L))


def odd_residual(w, L):
    return abs(2.0 * math.tan(w * math.pi) - 1.0 / math.tan(w * L))


def _lattice(L: float, upper: float) -> np.ndarray:
    a = np.arange(1, int(2 * upper) + 2) / 2.0
    b = np.arange(1, int(2 * upper * L / math.pi) + 2) * (math.pi / (2 * L))
    pts = np.unique(np.concatenate([[0.0], a, b]))
    # merge lattice points that coincide up to roundoff (resonant L)
    keep = np.concatenate([[True], np.diff(pts) > 1e-12 * np.maximum(1.0, pts[1:])])
    return pts[keep]


def _roots(form, L: float, count: int, xtol: float = 1e-14) -> list[float]:
    if not L > 0:
        raise ValueError(f"L must be positive, got {L}")
    if count < 1:
        raise ValueError("count must be >= 1")
    upper = max(2.0, count * 1.5)
    while True:
        pts = _lattice(L, upper)
        vals = form(pts, L)
        roots = []
        for k in range(1, pts.size):
            a, b = pts[k - 1], pts[k]
            fa, fb = vals[k - 1], vals[k]
            if abs(fb) < 1e-13:
                # exact root on the lattice: both tangents have poles there (resonance)
                roots.append(float(b))
                continue
            if abs(fa) < 1e-13:
                # left end is itself a root (or w=0): probe just inside the cell
                a = a + 1e-6 * (b - a)
                fa = form(a, L)
            if fa * fb < 0:
                roots.append(brentq(form, a, b, args=(L,), xtol=xtol, rtol=4 * np.finfo(float).eps))
            if len(roots) >= count:
                return roots[:count]
        if upper > 1e6:
            raise BracketingFailure(f"found only {len(roots)} of {count} roots for L={L}")
        upper *= 2


def even_dispersion_roots(L: float, count: int) -> list[float]:
    """First ``count`` positive roots of the even relation, ascending."""
    return _roots(even_form, L, count)


def odd_dispersion_roots(L: float, count: int) -> list[float]:
    """First ``count`` positive roots of the odd relation, ascending."""
    return _roots(odd_form, L, count)


@dataclass(frozen=True)
class Resonance:
    """L = pi*m/(2n): the double eigenvalue n^2 acquires a third eigenfunction."""

    m: int
    n: int
    L: float

    @property
    def kind(self) -> str:
        return "even" if self.m % 2 == 0 else "odd"

    @property
    def eigenvalue(self) -> float:
        return float(self.n ** 2)

    def profile(self):
        """Callable f(x, edge) of the extra eigenfunction."""
        m, n, L = self.m, self.n, self.L
        if self.kind == "even":
            s = (-1) ** (n + m // 2)

            def f(x, edge):
                if edge == "segment":
                    return np.cos(n * x)
                if edge == "ring_plus":
                    return s * np.cos(n * (x - L - np.pi))
                return s * np.cos(n * (-x - L - np.pi))
        else:
            s = (-1) ** (n + (m - 1) // 2)

            def f(x, edge):
                if edge == "segment":
                    return np.sin(n * x)
                if edge == "ring_plus":
                    return s * np.cos(n * (x - L - np.pi))
                return -s * np.cos(n * (-x - L - np.pi))
        return f

    def eigenfunction(self, grid: DumbbellGrid) -> GraphFunction:
        return sample(grid, self.profile())


def detect_resonance(L: float, max_den: int = 64, tol: float = 1e-9) -> Resonance | None:
    """Smallest (m, n) with |L - pi m/(2n)| < tol and n <= max_den, else None."""
    for n in range(1, max_den + 1):
        m = round(2 * n * L / math.pi)
        if m >= 1 and abs(L - math.pi * m / (2 * n)) < tol:
            return Resonance(m=int(m), n=n, L=L)
    return None


@dataclass
class SpectrumReport:
    L: float
    doubles: list[float]
    even_roots: list[float]
    odd_roots: list[float]
    resonance: Resonance | None = None
    residuals: dict = field(default_factory=dict)

    @property
    def resonant(self) -> bool:
        return self.resonance is not None

    def eigenvalues(self, count: int) -> list[float]:
        """Smallest ``count`` eigenvalues of -Delta with multiplicity, ascending."""
        vals = [0.0] + [w * w for w in self.even_roots] + [w * w for w in self.odd_roots]
        for n2 in self.doubles:
            vals += [n2, n2]
        vals.sort()
        if len(vals) < count:
            raise ValueError("report too short; request more roots")
        return vals[:count]

    def orderings_hold(self) -> bool:
        """Check the interlacing of the first even and odd roots with 1/2 and pi/(2L)."""
        L = self.L
        O1, O2 = self.odd_roots[0], self.odd_roots[1]
        w1 = self.even_roots[0]
        tol = 1e-12
        if L < math.pi:
            ok = 0 < O1 < 0.5 < w1 < min(1.0, math.pi / (2 * L)) + tol and min(1.0, math.pi / (2 * L)) <= O2 + tol
        else:
            ok = (0 < O1 < math.pi / (2 * L) <= w1 + tol and w1 <= min(0.5, math.pi / L) + tol
                  and min(0.5, math.pi / L) < O2 + tol)
        return bool(ok and O1 < w1 < O2)


def spectrum_report(L: float, count: int = 4) -> SpectrumReport:
    """Roots of both relations (``count`` each), the ring doubles below the largest root, resonance."""
    even = even_dispersion_roots(L, count)
    odd = odd_dispersion_roots(L, count)
    top = max(even[-1], odd[-1])
    n_max = max(1, math.ceil(top))
    doubles = [float(n * n) for n in range(1, n_max + 1)]
    res = {}
    for name, roots, fn, form in (("even", even, even_residual, even_form),
                                  ("odd", odd, odd_residual, odd_form)):
        res[name] = [float(abs(form(w, L))) for w in roots]
        res[name + "_tan"] = [fn(w, L) if abs(form(w, L)) > 0 and _away_from_poles(w, L) else float("nan")
                              for w in roots]
    return SpectrumReport(L=L, doubles=doubles, even_roots=even, odd_roots=odd,
                          resonance=detect_resonance(L), residuals=res)


def _away_from_poles(w: float, L: float, margin: float = 1e-6) -> bool:
    d1 = abs(math.cos(w * math.pi))
    d2 = min(abs(math.cos(w * L)), abs(math.sin(w * L)))
    return d1 > margin and d2 > margin


def odd_mode_profile(L: float, omega: float):
    """f(x, edge) of the odd eigenfunction belonging to an odd-relation root ``omega``."""
    amp = math.sin(omega * L) / math.cos(omega * math.pi)

    def f(x, edge):
        if edge == "segment":
            return np.sin(omega * x)
        if edge == "ring_plus":
            return amp * np.cos(omega * (x - L - np.pi))
        return -amp * np.cos(omega * (x + L + np.pi))
    return f


def odd_eigenfunction(L: float, grid: DumbbellGrid) -> GraphFunction:
    """Samples of the eigenfunction for the first odd root (sin on the segment)."""
    grid_L = grid.L
    if abs(grid_L - L) > 1e-12:
        raise ValueError("grid was built for a different L")
    omega1 = odd_dispersion_roots(L, 1)[0]
    return sample(grid, odd_mode_profile(L, omega1))


def odd_eigenfunction_norm2(L: float, omega1: float | None = None) -> float:
    """Exact squared L2 norm of the first odd eigenfunction."""
    if omega1 is None:
        omega1 = odd_dispersion_roots(L, 1)[0]
    return L + 2 * math.pi * math.sin(L * omega1) ** 2 / math.cos(math.pi * omega1) ** 2


def rational_multiple_of_pi(L: float, max_den: int = 64) -> Fraction | None:
    r = Fraction(L / math.pi).limit_denominator(max_den)
    return r if abs(float(r) * math.pi - L) < 1e-12 * max(1.0, L) else None
