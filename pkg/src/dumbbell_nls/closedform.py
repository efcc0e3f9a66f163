"""Closed-form standing waves: the constant state, ring (dnoidal) and segment (cnoidal) waves.

All profiles are built in the scaled variable z = mu*x, mu = |lam|^(1/2), where
the stationary equation reads  Psi'' = Psi - 2 Psi^3, and mapped back by
Phi(x) = mu * Psi(mu * x).

Ring family: a dn wave fills the right ring, Psi = dn((z - (L+pi)mu)/s; k)/s with
s = sqrt(2 - k^2); linear exponential tails fill the segment and the left ring.

Segment family: a cn wave fills the segment, Psi = k cn(z/s; k)/s with
s = sqrt(2k^2 - 1); linear exponential tails fill both rings.

In both cases the modulus k is fixed by matching the flux at the junction
where the wave meets its tails.  The cubic term is dropped in the tails, so
the profiles solve the stationary equation only up to O(p^3) there, p being
the junction value; a Newton polish removes the rest.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .elliptic import EllipticModulus, complete_K, jacobi
from .errors import ModulusOutOfRange, NoRoot
from .grid import EDGES, DumbbellGrid, GraphFunction, sample

FAMILIES = ("ring", "segment")
_KC_FLOOR = 1e-280


def _mu(lam: float) -> float:
    if not lam < 0:
        raise ValueError(f"lam must be negative, got {lam!r}")
    return math.sqrt(-lam)


def _check_family(family: str) -> None:
    if family not in FAMILIES:
        raise ValueError(f"family must be one of {FAMILIES}, got {family!r}")


def _tail_ratio(mu: float, L: float) -> float:
    """G0'(L mu) / G0(L mu) for the ring-family segment tail."""
    t1, t2 = math.tanh(math.pi * mu), math.tanh(2.0 * L * mu)
    return (t2 + 2.0 * t1) / (1.0 + 2.0 * t1 * t2)


# ---------------------------------------------------------------------------
# constant state
# ---------------------------------------------------------------------------
def constant_state(lam: float, L: float, grid: DumbbellGrid | None = None):
    """The constant solution Phi = sqrt(|lam|/2).

    Returns a StationaryState on ``grid`` (default: N=8 grid for L, only
    valid when commensurate).  Q = (L + 2pi)|lam| and E = -(2L + 4pi) p^4.
    """
    from .grid import make_grid
    from .solve import make_state
    _mu(lam)
    p = math.sqrt(-lam / 2.0)
    grid = grid or make_grid(L, 8)
    phi = GraphFunction(grid, np.full(grid.size, p))
    st = make_state(phi, lam, method="analytic", spectra=False)
    st.tag = "constant"
    return st


def constant_charge(lam: float, L: float) -> float:
    return (L + 2.0 * math.pi) * abs(lam)


def constant_energy(lam: float, L: float) -> float:
    return -(2.0 * L + 4.0 * math.pi) * (lam / 2.0) ** 2


# ---------------------------------------------------------------------------
# moduli
# ---------------------------------------------------------------------------
def _scale(mod: EllipticModulus, family: str) -> float:
    # ring: sqrt(2 - k^2) = sqrt(1 + kc^2); segment: sqrt(2k^2 - 1) = sqrt(1 - 2 kc^2)
    if family == "ring":
        return math.sqrt(1.0 + mod.m1)
    val = 1.0 - 2.0 * mod.m1
    if val <= 0.0:
        raise ModulusOutOfRange(f"segment family needs k > 1/sqrt(2), got k={mod.k!r}")
    return math.sqrt(val)


def _half_width(mu: float, L: float, family: str) -> float:
    """Scaled distance from the wave centre to the junction: pi*mu (ring) or L*mu (segment)."""
    return math.pi * mu if family == "ring" else L * mu


def solve_k_star(mu: float, family: str = "ring", L: float | None = None) -> EllipticModulus:
    """Modulus at which the wave reaches its first quarter period exactly at the junction.

    Ring family: sqrt(2 - k^2) K(k) = pi*mu.  Segment family:
    sqrt(2k^2 - 1) K(k) = L*mu.  Solved for log(k') by Brent's method.

    Raises:
        NoRoot: when mu is too small for a root in (k_min, 1).
    """
    _check_family(family)
    if family == "segment" and L is None:
        raise ValueError("segment family needs L")
    target = _half_width(mu, L, family)

    def f(t):
        mod = EllipticModulus.from_complement(math.exp(t))
        return _scale(mod, family) * complete_K(mod) - target

    hi = 0.0 if family == "ring" else math.log(math.sqrt(0.5)) - 1e-12
    lo = math.log(_KC_FLOOR)
    f_lo, f_hi = f(lo), f(hi)
    if not (f_lo > 0 > f_hi):
        raise NoRoot(f"no k_* for mu={mu!r} ({family}): residuals {f_lo!r}, {f_hi!r}")
    t = brentq(f, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=200)
    return EllipticModulus.from_complement(math.exp(t))


def pq_functions(k, mu: float, family: str = "ring", L: float | None = None) -> tuple[float, float]:
    """Junction value p and flux q of the wave at modulus ``k``.

    Ring family: p = dn(xi)/s, q = k^2 sn(xi) cn(xi)/s^2 with xi = pi*mu/s.
    Segment family: p = k cn(xi)/s, q = k sn(xi) dn(xi)/s^2 with xi = L*mu/s.
    ``k`` may be a float or an EllipticModulus (use the latter near k=1).
    """
    _check_family(family)
    mod = k if isinstance(k, EllipticModulus) else EllipticModulus.from_k(float(k))
    if not 0.0 < mod.k <= 1.0:
        raise ModulusOutOfRange(f"k={mod.k!r} outside (0, 1]")
    s = _scale(mod, family)
    xi = _half_width(mu, L, family) / s
    sn, cn, dn = jacobi(xi, mod)
    if family == "ring":
        return dn / s, mod.k ** 2 * sn * cn / s ** 2
    return mod.k * cn / s, mod.k * sn * dn / s ** 2


@dataclass(frozen=True)
class MatchedModulus:
    """Result of the junction matching for one family at given mu (and L)."""

    family: str
    mu: float
    L: float
    k_star: EllipticModulus
    k0: EllipticModulus
    p: float
    q: float
    residual: float

    @property
    def lam(self) -> float:
        return -self.mu ** 2


def matching_residual(k, mu: float, L: float, family: str) -> float:
    """Ring: 2q - p * G0'/G0.  Segment: q - 2p tanh(pi mu)."""
    p, q = pq_functions(k, mu, family, L)
    if family == "ring":
        return 2.0 * q - p * _tail_ratio(mu, L)
    return q - 2.0 * p * math.tanh(math.pi * mu)


def solve_k0(mu: float, L: float, family: str = "ring") -> MatchedModulus:
    """Modulus k0 in (k_*, 1) satisfying the flux condition at the wave's junction.

    Raises:
        NoRoot: if the matching residual does not change sign on (k_*, 1).
    """
    _check_family(family)
    k_star = solve_k_star(mu, family, L)

    def f(t):
        return matching_residual(EllipticModulus.from_complement(math.exp(t)), mu, L, family)

    hi = math.log(k_star.kc)
    lo = max(math.log(_KC_FLOOR), hi - 60.0)
    f_hi, f_lo = f(hi), f(lo)
    if f_hi == 0.0:
        t = hi
    elif f_hi * f_lo >= 0.0:
        raise NoRoot(f"matching has no sign change on (k_*, 1) for mu={mu!r}, L={L!r} ({family})")
    else:
        t = brentq(f, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=200)
    k0 = EllipticModulus.from_complement(math.exp(t))
    p, q = pq_functions(k0, mu, family, L)
    return MatchedModulus(family, mu, L, k_star, k0, p, q, matching_residual(k0, mu, L, family))


def expected_complement(mu: float, L: float, family: str = "ring") -> float:
    """Leading-order k0' = (4/sqrt(3)) e^(-pi mu) (ring) or e^(-L mu) (segment)."""
    return 4.0 / math.sqrt(3.0) * math.exp(-_half_width(mu, L, family))


# ---------------------------------------------------------------------------
# piecewise profiles
# ---------------------------------------------------------------------------
class ScaledProfile:
    """A function of the scaled coordinate z on each edge, with its z-derivative.

    Edges are given by name; each maps to (value(z), derivative(z)) callables.
    """

    def __init__(self, mu: float, L: float, pieces: dict, label: str = ""):
        self.mu, self.L, self.pieces, self.label = mu, L, pieces, label

    @property
    def lam(self) -> float:
        return -self.mu ** 2

    def value(self, edge: str, z):
        return self.pieces[edge][0](np.asarray(z, dtype=float))

    def derivative(self, edge: str, z):
        return self.pieces[edge][1](np.asarray(z, dtype=float))

    def physical(self, x, edge: str):
        """Phi(x) = mu Psi(mu x)."""
        return self.mu * self.value(edge, self.mu * np.asarray(x, dtype=float))

    def on_grid(self, grid: DumbbellGrid) -> GraphFunction:
        if abs(grid.L - self.L) > 1e-12:
            from .errors import GridMismatch
            raise GridMismatch(f"profile built for L={self.L!r}, grid has L={grid.L!r}")
        return sample(grid, lambda x, e: self.physical(x, e))

    def junction_defects(self) -> dict[str, float]:
        """Continuity and flux mismatches at both junctions (scaled variables).

        Flux is the sum of derivatives pointing out of the junction.
        """
        a, b = self.L * self.mu, (self.L + 2.0 * math.pi) * self.mu
        v, d = self.value, self.derivative
        return {
            "left_continuity_ring_start": float(v("ring_minus", -b) - v("segment", -a)),
            "left_continuity_ring_end": float(v("ring_minus", -a) - v("segment", -a)),
            "left_flux": float(d("segment", -a) - d("ring_minus", -a) + d("ring_minus", -b)),
            "right_continuity_ring_start": float(v("ring_plus", a) - v("segment", a)),
            "right_continuity_ring_end": float(v("ring_plus", b) - v("segment", a)),
            "right_flux": float(d("ring_plus", a) - d("ring_plus", b) - d("segment", a)),
        }


def first_integral(psi, dpsi):
    """(Psi')^2 - Psi^2 + Psi^4, constant along any solution of Psi'' = Psi - 2 Psi^3."""
    return dpsi ** 2 - psi ** 2 + psi ** 4


def _cosh_tail(amp: float, centre: float):
    return (lambda z: amp * np.cosh(z - centre), lambda z: amp * np.sinh(z - centre))


def ring_profile(matched: MatchedModulus, side: str = "ring_plus") -> ScaledProfile:
    """dn wave on one ring with linear tails on the segment and the other ring."""
    if matched.family != "ring":
        raise ValueError("ring_profile needs a ring-family MatchedModulus")
    mu, L, mod = matched.mu, matched.L, matched.k0
    s = _scale(mod, "ring")
    centre = (L + math.pi) * mu
    p = matched.p

    def wave(z):
        return jacobi((z - centre) / s, mod)[2] / s

    def dwave(z):
        sn, cn, _ = jacobi((z - centre) / s, mod)
        return -mod.k ** 2 * sn * cn / s ** 2

    pieces = _with_tails(mu, L, p, (wave, dwave))
    prof = ScaledProfile(mu, L, pieces, "dnoidal")
    return prof if side == "ring_plus" else mirrored(prof)


def _with_tails(mu: float, L: float, p: float, ring_piece) -> dict:
    """Right-ring wave plus segment and left-ring cosh tails with junction value p."""
    pm, lm = math.pi * mu, L * mu
    den = math.cosh(pm) * math.cosh(2 * lm) + 2.0 * math.sinh(pm) * math.sinh(2 * lm)
    amp = p / den
    c0, c1 = amp * math.cosh(pm), 2.0 * amp * math.sinh(pm)
    seg = (lambda z: c0 * np.cosh(z + lm) + c1 * np.sinh(z + lm),
           lambda z: c0 * np.sinh(z + lm) + c1 * np.cosh(z + lm))
    return {"ring_minus": _cosh_tail(amp, -lm - pm), "segment": seg, "ring_plus": ring_piece}


def mirrored(prof: ScaledProfile) -> ScaledProfile:
    """Reflection z -> -z (swaps the rings)."""
    swap = {"ring_minus": "ring_plus", "segment": "segment", "ring_plus": "ring_minus"}
    pieces = {}
    for edge, other in swap.items():
        f, df = prof.pieces[other]
        pieces[edge] = ((lambda z, f=f: f(-z)), (lambda z, df=df: -df(-z)))
    return ScaledProfile(prof.mu, prof.L, pieces, prof.label)


def segment_profile(matched: MatchedModulus) -> ScaledProfile:
    """cn wave on the segment with cosh tails on both rings."""
    if matched.family != "segment":
        raise ValueError("segment_profile needs a segment-family MatchedModulus")
    mu, L, mod = matched.mu, matched.L, matched.k0
    s = _scale(mod, "segment")
    amp = matched.p / math.cosh(math.pi * mu)
    centre = (L + math.pi) * mu

    def wave(z):
        return mod.k * jacobi(z / s, mod)[1] / s

    def dwave(z):
        sn, _, dn = jacobi(z / s, mod)
        return -mod.k * sn * dn / s ** 2

    return ScaledProfile(mu, L, {"ring_minus": _cosh_tail(amp, -centre), "segment": (wave, dwave),
                                 "ring_plus": _cosh_tail(amp, centre)}, "cnoidal")


def _closed_state(prof: ScaledProfile, grid: DumbbellGrid, label: str):
    from .solve import make_state
    st = make_state(prof.on_grid(grid), prof.lam, method=label, spectra=False)
    return st


def dnoidal_state(matched: MatchedModulus, grid: DumbbellGrid):
    """Ring-family closed form sampled on ``grid`` (wave on the right ring)."""
    return _closed_state(ring_profile(matched), grid, "dnoidal")


def cnoidal_state(matched: MatchedModulus, grid: DumbbellGrid):
    """Segment-family closed form sampled on ``grid``."""
    return _closed_state(segment_profile(matched), grid, "cnoidal")


# ---------------------------------------------------------------------------
# sech approximations
# ---------------------------------------------------------------------------
def sech_profile(lam: float, L: float, placement: str = "segment") -> ScaledProfile:
    """Solitary-wave approximation satisfying every junction condition exactly.

    ``placement="segment"``: sech(z) on the segment; each ring carries
    sech(L mu)[1 + tanh(L mu)/(4 pi mu) (z - a)(z - b)], a quadratic taking the
    junction value at both ends and absorbing half the segment flux at each.

    ``placement="ring"``: sech(z - (L+pi)mu) plus a quadratic correction
    c (z - a)(z - b) on the right ring, cosh tails on the segment and left ring
    with junction value sech(pi mu); c is chosen so the flux balances.
    """
    mu = _mu(lam)
    lm, pm = L * mu, math.pi * mu
    if placement == "segment":
        amp, slope = 1.0 / math.cosh(lm), math.tanh(lm) / (4.0 * pm)
        a, b = lm, lm + 2.0 * pm

        def ring(z):
            return amp * (1.0 + slope * (z - a) * (z - b))

        def dring(z):
            return amp * slope * (2.0 * z - a - b)

        right = (ring, dring)
        left = ((lambda z: ring(-z)), (lambda z: -dring(-z)))
        seg = ((lambda z: 1.0 / np.cosh(z)), (lambda z: -np.tanh(z) / np.cosh(z)))
        return ScaledProfile(mu, L, {"ring_minus": left, "segment": seg, "ring_plus": right},
                             "sech-segment")
    if placement == "ring":
        p, q = 1.0 / math.cosh(pm), math.tanh(pm) / math.cosh(pm)
        c = (2.0 * q - p * _tail_ratio(mu, L)) / (4.0 * pm)
        a, b, centre = lm, lm + 2.0 * pm, lm + pm

        def ring(z):
            return 1.0 / np.cosh(z - centre) + c * (z - a) * (z - b)

        def dring(z):
            return -np.tanh(z - centre) / np.cosh(z - centre) + c * (2.0 * z - a - b)

        return ScaledProfile(mu, L, _with_tails(mu, L, p, (ring, dring)), "sech-ring")
    raise ValueError(f"placement must be 'segment' or 'ring', got {placement!r}")


def sech_seed(grid: DumbbellGrid, lam: float, placement: str = "segment") -> GraphFunction:
    """:func:`sech_profile` sampled on ``grid`` in physical variables."""
    return sech_profile(lam, grid.L, placement).on_grid(grid)


def asymptotic_charge_corrections(lam: float, L: float) -> tuple[float, float]:
    """Leading large-|lam| departures (Q_sym - 2mu, Q_asym - 2mu) of the segment and ring waves.

    Returned separately from :func:`asymptotic_charges` because for long
    segments they fall far below the resolution of 2mu in double precision.
    """
    mu = _mu(lam)
    return (-16.0 / 3.0 * L * mu * mu * math.exp(-2.0 * L * mu),
            16.0 / 3.0 * math.pi * mu * mu * math.exp(-2.0 * math.pi * mu))


def asymptotic_charges(lam: float, L: float) -> tuple[float, float]:
    """Leading large-|lam| charges (Q_sym, Q_asym) of the segment and ring waves.

    Q_sym = 2mu - (16/3) L |lam| e^(-2 L mu),  Q_asym = 2mu + (16/3) pi |lam| e^(-2 pi mu).
    """
    lead = 2.0 * _mu(lam)
    d_sym, d_asym = asymptotic_charge_corrections(lam, L)
    return lead + d_sym, lead + d_asym


__all__ = ["FAMILIES", "EDGES", "MatchedModulus", "ScaledProfile", "asymptotic_charge_corrections",
           "asymptotic_charges",
           "cnoidal_state", "constant_charge", "constant_energy", "constant_state",
           "dnoidal_state", "expected_complement", "first_integral", "matching_residual",
           "mirrored", "pq_functions", "ring_profile", "sech_profile", "sech_seed",
           "segment_profile", "solve_k0", "solve_k_star"]
