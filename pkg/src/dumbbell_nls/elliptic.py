"""Jacobi elliptic functions and complete elliptic integrals via the AGM.

Everything is parametrized by the modulus k together with its complement
k' = sqrt(1 - k^2).  Near k = 1 the complement is the accurate quantity (the
moduli used by the closed-form branches have k' ~ e^{-2 pi}), so callers
with a tiny k' should construct :class:`EllipticModulus` from it directly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import ModulusOutOfRange, QuadratureNearPole

MAX_LANDEN_STEPS = 16
_TOL = 1e-16


@dataclass(frozen=True)
class EllipticModulus:
    """Modulus k in [0, 1] with its complement kc = sqrt(1 - k^2) stored separately."""

    k: float
    kc: float

    @classmethod
    def from_k(cls, k: float) -> "EllipticModulus":
        if not 0.0 <= k <= 1.0:
            raise ModulusOutOfRange(f"modulus k={k!r} outside [0, 1]")
        return cls(float(k), math.sqrt((1.0 - k) * (1.0 + k)))

    @classmethod
    def from_complement(cls, kc: float) -> "EllipticModulus":
        if not 0.0 <= kc <= 1.0:
            raise ModulusOutOfRange(f"complementary modulus {kc!r} outside [0, 1]")
        return cls(math.sqrt((1.0 - kc) * (1.0 + kc)), float(kc))

    @property
    def m1(self) -> float:
        """1 - k^2."""
        return self.kc * self.kc


def _as_modulus(k) -> EllipticModulus:
    return k if isinstance(k, EllipticModulus) else EllipticModulus.from_k(float(k))


def _agm_sequence(mod: EllipticModulus):
    """Descending Landen/AGM sequences (a_n, c_n) started at (1, k', k)."""
    a, b, c = 1.0, mod.kc, mod.k
    a_seq, c_seq = [a], [c]
    for _ in range(MAX_LANDEN_STEPS):
        if abs(c) <= _TOL * a:
            break
        a, b, c = 0.5 * (a + b), math.sqrt(a * b), 0.5 * (a - b)
        a_seq.append(a)
        c_seq.append(c)
    return a_seq, c_seq


def jacobi(xi, k):
    """Return (sn, cn, dn) at argument ``xi`` (scalar or array) and modulus ``k``.

    ``k`` may be a float or an :class:`EllipticModulus`.  k = 1 takes the
    hyperbolic branch (tanh, sech, sech); k = 0 the circular one.
    """
    mod = _as_modulus(k)
    x = np.asarray(xi, dtype=float)
    if mod.kc == 0.0:
        sech = 1.0 / np.cosh(x)
        out = (np.tanh(x), sech, sech.copy())
    elif mod.k == 0.0:
        out = (np.sin(x), np.cos(x), np.ones_like(x))
    else:
        a_seq, c_seq = _agm_sequence(mod)
        n = len(a_seq) - 1
        phi = (2.0 ** n) * a_seq[n] * x
        for j in range(n, 0, -1):
            phi = 0.5 * (phi + np.arcsin(c_seq[j] / a_seq[j] * np.sin(phi)))
        sn, cn = np.sin(phi), np.cos(phi)
        # dn > 0 on the real line; the sum of squares avoids the 0/0 of cn/cos(phi1 - phi0) at xi = K
        dn = np.sqrt(mod.m1 + (mod.k * cn) ** 2)
        out = (sn, cn, dn)
    if np.ndim(xi) == 0:
        return tuple(float(v) for v in out)
    return out


def agm(a: float, b: float) -> float:
    for _ in range(64):
        if abs(a - b) <= _TOL * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return 0.5 * (a + b)


def complete_K(k) -> float:
    """Complete elliptic integral of the first kind, K = pi / (2 AGM(1, k'))."""
    mod = _as_modulus(k)
    if mod.kc <= 0.0:
        raise ModulusOutOfRange("K(k) diverges at k = 1")
    return math.pi / (2.0 * agm(1.0, mod.kc))


def complete_E(k) -> float:
    """Complete elliptic integral of the second kind, E = K (1 - sum 2^(n-1) c_n^2)."""
    mod = _as_modulus(k)
    if mod.kc == 0.0:
        return 1.0
    a_seq, c_seq = _agm_sequence(mod)
    s = sum(2.0 ** (n - 1) * c * c for n, c in enumerate(c_seq))
    return complete_K(mod) * (1.0 - s)


def K_log_expansion(mod: EllipticModulus) -> float:
    """Leading behaviour log(4/k') as k -> 1."""
    return math.log(4.0 / mod.kc)


def E_log_expansion(mod: EllipticModulus) -> float:
    """Two-term behaviour of E as k -> 1."""
    return 1.0 + 0.5 * mod.m1 * (math.log(4.0 / mod.kc) - 0.5)


def dk_jacobi_at_1(xi):
    """k-derivatives of (sn, cn, dn) at k = 1, in closed form."""
    x = np.asarray(xi, dtype=float)
    sh, ch = np.sinh(x), np.cosh(x)
    sech, th = 1.0 / ch, np.tanh(x)
    minus = sh * ch - x
    plus = sh * ch + x
    out = (-0.5 * minus * sech ** 2, 0.5 * minus * th * sech, -0.5 * plus * th * sech)
    if np.ndim(xi) == 0:
        return tuple(float(v) for v in out)
    return out


def dn_first_order(xi, k):
    """sech + (1/4)(1 - k^2)[sinh cosh + xi] tanh sech, the first-order dn near k = 1."""
    mod = _as_modulus(k)
    x = np.asarray(xi, dtype=float)
    sech, th = 1.0 / np.cosh(x), np.tanh(x)
    return sech + 0.25 * mod.m1 * (np.sinh(x) * np.cosh(x) + x) * th * sech


def dk_dn_variation(xi: float, k) -> float:
    """d dn / dk at fixed xi from the variation-of-constants representation.

    Valid for 0 <= xi < K(k), where cn has no zero.

    Raises:
        QuadratureNearPole: when xi lies within 1e-6 of K(k).
    """
    mod = _as_modulus(k)
    if not 0.0 < mod.k < 1.0:
        raise ModulusOutOfRange(f"need 0 < k < 1, got {mod.k!r}")
    K = complete_K(mod)
    if not 0.0 <= xi < K or K - xi < 1e-6:
        raise QuadratureNearPole(f"xi={xi!r} not in [0, K - 1e-6) with K={K!r}")
    if xi == 0.0:
        return 0.0
    integral, _ = quad(lambda t: 1.0 / jacobi(t, mod)[1] ** 2, 0.0, xi,
                       epsabs=0.0, epsrel=1e-12, limit=200)
    sn, cn, _ = jacobi(xi, mod)
    return -mod.k * sn * cn * integral


def property_suite(samples: int = 10_000, seed: int = 0) -> list[tuple[str, float, float, bool]]:
    """Numerical self-checks of this module.

    Returns (name, measured, bound, passed) per property: Jacobi identities on
    random arguments, periodicity and monotonicity of dn, the closed-form
    k-derivatives at k=1 against finite differences, the variation formula
    against a centered difference, the order of the first-order dn
    expansion, and the logarithmic K expansion.
    """
    rng = np.random.default_rng(seed)
    out = []

    xi = rng.uniform(-20.0, 20.0, samples)
    ks = rng.uniform(0.0, 1.0, samples)
    worst = 0.0
    for k in np.unique(np.round(ks, 3)):
        sel = np.round(ks, 3) == k
        sn, cn, dn = jacobi(xi[sel], float(k))
        worst = max(worst, float(np.max(np.abs(sn * sn + cn * cn - 1.0))),
                    float(np.max(np.abs(dn * dn + k * k * sn * sn - 1.0))))
    out.append(("identity_residual", worst, 1e-12, worst < 1e-12))

    worst = 0.0
    for k in (0.3, 0.7, 0.9, 0.99, 0.999999):
        K = complete_K(k)
        x = np.linspace(0.0, 3.0 * K, 101)
        worst = max(worst, float(np.max(np.abs(jacobi(x + 2 * K, k)[2] - jacobi(x, k)[2]))))
    out.append(("dn_periodicity", worst, 1e-11, worst < 1e-11))

    rises = 0.0
    for k in (0.3, 0.7, 0.9, 0.99):
        d = np.diff(jacobi(np.linspace(0.0, complete_K(k), 401), k)[2])
        rises = max(rises, float(np.max(d)))
    out.append(("dn_decreasing_on_quarter_period", rises, 0.0, rises <= 0.0))

    worst = 0.0
    step = 1e-6
    mod = EllipticModulus.from_k(1.0 - step)
    for x in (0.5, 1.0, 2.0):
        fd = (np.array(jacobi(x, mod)) - np.array(jacobi(x, 1.0))) / (-step)
        worst = max(worst, float(np.max(np.abs(fd - np.array(dk_jacobi_at_1(x))))))
    out.append(("dk_at_1_vs_finite_difference", worst, 1e-4, worst < 1e-4))

    dk = 1e-6
    fd = (jacobi(1.0, 0.9 + dk)[2] - jacobi(1.0, 0.9 - dk)[2]) / (2 * dk)
    err = abs(fd - dk_dn_variation(1.0, 0.9))
    out.append(("variation_formula_vs_centered_difference", err, 1e-6, err < 1e-6))

    ratios = []
    for x in (1.0, 2.0, 4.0):
        errs = []
        for m1 in (1e-3, 1e-4):
            m = EllipticModulus.from_complement(math.sqrt(m1))
            errs.append(abs(jacobi(x, m)[2] - float(dn_first_order(x, m))))
        ratios.append(errs[0] / errs[1])
    worst_ratio = max(ratios, key=lambda r: abs(math.log(r / 100.0)))
    out.append(("first_order_expansion_ratio", worst_ratio, 100.0, bool(50.0 <= worst_ratio <= 200.0)))

    m = EllipticModulus.from_complement(1e-4)
    err = abs(complete_K(m) - math.log(4e4))
    out.append(("K_log_expansion", err, 1e-6, err < 1e-6))
    return out
