"""Stationary NLS solvers on the dumbbell: functionals, Petviashvili, Newton, continuation.

The stationary problem is  -Delta phi - 2 phi^3 = lam * phi  with lam < 0.
Discrete functionals are chosen so that the weighted gradient of
H = E - lam*Q is exactly twice the residual vector A phi - 2 phi^3 - lam phi.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (BranchEnd, CollapseToZero, MaxIterExceeded, SingularJacobian,
                     SolverFailure)
from .grid import DumbbellGrid, GraphFunction, graph_distance, invariant_group, symmetrize
from .operators import (build_l_minus, build_l_plus, build_laplacian, dirichlet_form,
                        eigen_smallest, negative_count)

log = logging.getLogger(__name__)

TAGS = ("constant", "asymmetric", "symmetric", "other")
DENSE_EIG_LIMIT = 1600
# below this (times max(1, |lam|)) the double-precision second L+ eigenvalue is roundoff
REFINE_THRESHOLD = 1e-8


# ---------------------------------------------------------------------------
# functionals
# ---------------------------------------------------------------------------
def _vals(phi) -> np.ndarray:
    return phi.values if isinstance(phi, GraphFunction) else np.asarray(phi, dtype=float)


def charge(phi: GraphFunction) -> float:
    """Q = integral of phi^2 (trapezoid)."""
    return float(np.sum(phi.grid.weights() * phi.values ** 2))


def energy(phi: GraphFunction) -> float:
    """E = integral of (phi')^2 - phi^4, with the gradient term summed over mesh intervals."""
    v = phi.values
    return dirichlet_form(phi.grid, v) - float(np.sum(phi.grid.weights() * v ** 4))


def hamiltonian(phi: GraphFunction, lam: float) -> float:
    return energy(phi) - lam * charge(phi)


def residual_vector(phi: GraphFunction, lam: float, lap=None) -> np.ndarray:
    lap = lap or build_laplacian(phi.grid)
    v = phi.values
    return lap.apply(v) - 2.0 * v ** 3 - lam * v


def residual_norm(phi: GraphFunction, lam: float, lap=None) -> float:
    r = residual_vector(phi, lam, lap)
    return math.sqrt(float(np.sum(phi.grid.weights() * r * r)))


def edge_charge(phi: GraphFunction, edge: str) -> float:
    """Trapezoid integral of phi^2 over one closed edge."""
    vals = phi.edge_values(edge) ** 2
    return float(phi.grid.h * (np.sum(vals) - 0.5 * (vals[0] + vals[-1])))


# ---------------------------------------------------------------------------
# state record and classification
# ---------------------------------------------------------------------------
@dataclass
class StationaryState:
    grid: DumbbellGrid
    lam: float
    phi: GraphFunction
    Q: float
    E: float
    residual_norm: float
    tag: str = "other"
    lplus_head: tuple = ()
    lminus_min: float = float("nan")
    method: str = ""
    iterations: int = 0
    history: list = field(default_factory=list, repr=False)
    lplus_eig2_refined: bool = False

    @property
    def lplus_eig2(self) -> float:
        return self.lplus_head[1] if len(self.lplus_head) > 1 else float("nan")

    @property
    def morse_index(self) -> int:
        return negative_count(self.lplus_head, self.lam)


def classify_state(state) -> str:
    """constant / symmetric / asymmetric / other, tested in that order."""
    phi = state.phi if isinstance(state, StationaryState) else state
    v = phi.values
    vmax, vmin = float(np.max(v)), float(np.min(v))
    if vmax - vmin < 1e-6 * abs(vmax):
        return "constant"
    w = phi.grid.weights()
    norm = math.sqrt(float(np.sum(w * v * v)))
    diff = v - v[phi.grid.reflection()]
    if math.sqrt(float(np.sum(w * diff * diff))) < 1e-6 * norm:
        return "symmetric"
    q = norm * norm
    imbalance = abs(edge_charge(phi, "ring_plus") - edge_charge(phi, "ring_minus"))
    if imbalance / q > 0.1:
        return "asymmetric"
    return "other"


def lplus_spectrum(phi: GraphFunction, lam: float, count: int = 3) -> np.ndarray:
    """Smallest ``count`` eigenvalues of L+ (dense up to a few thousand nodes, else shift-invert)."""
    op = build_l_plus(phi.grid, phi, lam)
    return _smallest(op, count)


def lminus_spectrum(phi: GraphFunction, lam: float, count: int = 1) -> np.ndarray:
    return _smallest(build_l_minus(phi.grid, phi, lam), count)


def _smallest(op, count: int) -> np.ndarray:
    if op.grid.size <= DENSE_EIG_LIMIT:
        return np.array([e for e, _ in eigen_smallest(op, count)])
    s = np.sqrt(op.grid.weights())
    S = sp.diags(s) @ op.matrix @ sp.diags(1.0 / s)
    S = (0.5 * (S + S.T)).tocsc()
    sigma = float(np.min(op.potential)) - 1.0
    vals = spla.eigsh(S, k=count, sigma=sigma, which="LM", tol=0, return_eigenvectors=False)
    return np.sort(vals)


def _eig2_vector(phi: GraphFunction, lam: float) -> np.ndarray:
    """Double-precision eigenvector of L+ for the eigenvalue nearest zero."""
    op = build_l_plus(phi.grid, phi, lam)
    if op.grid.size <= DENSE_EIG_LIMIT:
        return eigen_smallest(op, 2)[1][1].values
    s = np.sqrt(op.grid.weights())
    S = sp.diags(s) @ op.matrix @ sp.diags(1.0 / s)
    S = (0.5 * (S + S.T)).tocsc()
    _, vec = spla.eigsh(S, k=1, sigma=-1e-3, which="LM")
    return vec[:, 0] / s


def refine_second_eigenvalue(state: StationaryState, dps: int = 50) -> float:
    """Multiprecision value of the second L+ eigenvalue (the one nearest zero).

    Used when the double-precision value is below the roundoff floor of the
    operator, e.g. on the symmetric branch where it is exponentially small.
    """
    from .precision import refined_lplus_eigenvalue
    return refined_lplus_eigenvalue(state.phi, state.lam, _eig2_vector(state.phi, state.lam), dps=dps)


def _needs_refinement(head, lam: float) -> bool:
    if len(head) < 3:
        return False
    floor = REFINE_THRESHOLD * max(1.0, abs(lam))
    # the refined eigenvalue is the one nearest zero, so the neighbours must be well separated
    return abs(head[1]) < floor and abs(head[2]) > 1e3 * floor and abs(head[0]) > 1e3 * floor


def make_state(phi: GraphFunction, lam: float, *, method: str = "", iterations: int = 0,
               history=None, spectra: bool = True, refine: bool = True) -> StationaryState:
    """Evaluate functionals, tag and (optionally) the L+/L- spectra of a profile.

    With ``refine`` a second L+ eigenvalue below ``REFINE_THRESHOLD * max(1, |lam|)``
    is recomputed in multiprecision arithmetic (see :func:`refine_second_eigenvalue`).
    """
    st = StationaryState(grid=phi.grid, lam=float(lam), phi=phi, Q=charge(phi), E=energy(phi),
                         residual_norm=residual_norm(phi, lam), method=method,
                         iterations=iterations, history=list(history or []))
    st.tag = classify_state(st)
    if spectra:
        st.lplus_head = tuple(float(e) for e in lplus_spectrum(phi, lam, 3))
        st.lminus_min = float(lminus_spectrum(phi, lam, 1)[0])
        if refine and _needs_refinement(st.lplus_head, lam):
            head = list(st.lplus_head)
            head[1] = refine_second_eigenvalue(st)
            st.lplus_head = tuple(head)
            st.lplus_eig2_refined = True
    return st


# ---------------------------------------------------------------------------
# seeds
# ---------------------------------------------------------------------------
def gaussian_seed(grid: DumbbellGrid, lam: float, center: str = "segment",
                  width: float | None = None) -> GraphFunction:
    """Gaussian of height |lam|^(1/2) centred at x=0 (``"segment"``) or x=L+pi (``"ring"``)."""
    mu = math.sqrt(abs(lam))
    width = width if width is not None else 1.0 / mu
    d = graph_distance(grid, center)
    return GraphFunction(grid, mu * np.exp(-0.5 * (d / width) ** 2))


def constant_seed(grid: DumbbellGrid, lam: float) -> GraphFunction:
    return GraphFunction(grid, np.full(grid.size, math.sqrt(abs(lam) / 2.0)))


# ---------------------------------------------------------------------------
# Petviashvili
# ---------------------------------------------------------------------------
def stabilizing_factor(u: np.ndarray, op: sp.spmatrix, w: np.ndarray) -> float:
    """M[u] = <(|lam| - Delta) u, u>_w / (2 * integral u^4)."""
    den = 2.0 * float(np.sum(w * u ** 4))
    return float(np.sum(w * (op @ u) * u)) / den


def petviashvili(seed: GraphFunction, lam: float, gamma: float = 1.5, tol: float = 1e-14,
                 max_iter: int = 5000, spectra: bool = True,
                 preserve_symmetry: bool = True) -> StationaryState:
    """Fixed-point iteration u <- M[u]^gamma (|lam| - Delta)^(-1) (2 u^3).

    Stops when the sup-norm update drops below ``tol`` (relative to max|u|
    once that is larger than 1), or when the update has stagnated at the
    roundoff floor.  ``history`` holds (M, update) per iteration.  With
    ``preserve_symmetry`` every iterate is projected onto the automorphisms
    of the dumbbell that leave the seed invariant.
    """
    if not lam < 0:
        raise ValueError("petviashvili needs lam < 0")
    grid = seed.grid
    w = grid.weights()
    lap = build_laplacian(grid)
    op = (lap.matrix + abs(lam) * sp.identity(grid.size)).tocsc()
    lu = spla.splu(op)
    u = seed.values.copy()
    group = invariant_group(u, grid) if preserve_symmetry else []
    u = symmetrize(u, group)
    history = []
    best = math.inf
    since_best = 0
    for it in range(1, max_iter + 1):
        if np.max(np.abs(u)) < 1e-12:
            raise CollapseToZero(f"iterate collapsed to zero at iteration {it}",
                                 state=GraphFunction(grid, u), history=history)
        m = stabilizing_factor(u, op, w)
        u_new = symmetrize(m ** gamma * lu.solve(2.0 * u ** 3), group)
        delta = float(np.max(np.abs(u_new - u)))
        u = u_new
        history.append((m, delta))
        scale = max(1.0, float(np.max(np.abs(u))))
        if delta < tol * scale:
            break
        # roundoff stagnation: no progress for 25 sweeps while already tiny
        if delta < 0.5 * best:
            best, since_best = delta, 0
        else:
            since_best += 1
        if since_best > 25 and best < 1e3 * tol * scale:
            break
        if not np.all(np.isfinite(u)):
            raise SolverFailure("Petviashvili iterate became non-finite", history=history)
    else:
        raise MaxIterExceeded(f"Petviashvili did not converge in {max_iter} iterations "
                              f"(last M={history[-1][0]!r}, update={history[-1][1]!r})",
                              state=GraphFunction(grid, u), history=history)
    return make_state(GraphFunction(grid, u), lam, method="petviashvili",
                      iterations=len(history), history=history, spectra=spectra)


# ---------------------------------------------------------------------------
# Newton
# ---------------------------------------------------------------------------
def newton(seed: GraphFunction, lam: float, tol: float = 1e-12, max_iter: int = 50,
           spectra: bool = True, res_floor: float | None = None,
           preserve_symmetry: bool = True) -> StationaryState:
    """Newton iteration on A phi - 2 phi^3 - lam phi with Jacobian L+.

    Converged when the sup-norm step falls below ``tol * max(1, max|phi|)``,
    or when the weighted residual is below ``res_floor`` (default
    1e-10 * max(1, |lam|)) and no longer drops by a factor 4.  The second test
    matters when L+ has an exponentially small eigenvalue: roundoff in the
    residual then produces steps far larger than ``tol`` that never settle.
    ``history`` holds the weighted residual norm before each step.

    With ``preserve_symmetry`` the iteration stays in the subspace of graph
    automorphisms fixing the seed.  Without it, a translation-like mode with
    an eigenvalue below roundoff (a soliton far from every junction) lets the
    iterate drift off a symmetric branch.
    """
    if res_floor is None:
        res_floor = 1e-10 * max(1.0, abs(lam))
    grid = seed.grid
    lap = build_laplacian(grid)
    A = lap.matrix
    # residuals in extended precision: the correction is then limited by the
    # conditioning of L+ times 1e-19 rather than 1e-16 (iterative refinement)
    A_ext = A.astype(np.longdouble)
    lam_ext = np.longdouble(lam)
    w = grid.weights()
    group = invariant_group(seed.values, grid) if preserve_symmetry else []
    u = symmetrize(seed.values.astype(np.longdouble), group)
    history = []
    r0 = None

    def resid(v):
        return A_ext @ v - 2 * v ** 3 - lam_ext * v

    for it in range(1, max_iter + 1):
        F = resid(u).astype(float)
        r = math.sqrt(float(np.sum(w * F * F)))
        history.append(r)
        if r0 is None:
            r0 = r
        if not math.isfinite(r) or r > 1e8 * max(1.0, r0):
            raise SingularJacobian(f"Newton diverged at lam={lam!r}",
                                   state=GraphFunction(grid, u.astype(float)), history=history)
        if len(history) > 1 and r < res_floor and r > 0.25 * history[-2]:
            break
        ud = u.astype(float)
        J = (A + sp.diags(-lam - 6.0 * ud ** 2)).tocsc()
        try:
            step = spla.splu(J).solve(F)
        except RuntimeError as exc:
            raise SingularJacobian(f"singular Jacobian at lam={lam!r}: {exc}",
                                   state=GraphFunction(grid, ud), history=history) from exc
        if not np.all(np.isfinite(step)):
            raise SingularJacobian(f"non-finite Newton step at lam={lam!r}",
                                   state=GraphFunction(grid, ud), history=history)
        u = symmetrize(u - step, group)
        if float(np.max(np.abs(step))) < tol * max(1.0, float(np.max(np.abs(u)))):
            F = resid(u).astype(float)
            history.append(math.sqrt(float(np.sum(w * F * F))))
            break
    else:
        raise MaxIterExceeded(f"Newton did not converge in {max_iter} iterations at lam={lam!r}",
                              state=GraphFunction(grid, u.astype(float)), history=history)
    u = u.astype(float)
    return make_state(GraphFunction(grid, u), lam, method="newton", iterations=it,
                      history=history, spectra=spectra)


def hybrid(seed: GraphFunction, lam: float, switch_tol: float = 1e-10, tol: float = 1e-12,
           spectra: bool = True) -> StationaryState:
    """Petviashvili down to ``switch_tol``, then Newton polish."""
    pet = petviashvili(seed, lam, tol=switch_tol, spectra=False)
    st = newton(pet.phi, lam, tol=tol, spectra=spectra)
    st.method = "hybrid"
    st.history = [("petviashvili", pet.history), ("newton", st.history)]
    st.iterations = pet.iterations + st.iterations
    return st


def solve(seed: GraphFunction, lam: float, method: str = "hybrid", **kw) -> StationaryState:
    fn = {"petviashvili": petviashvili, "newton": newton, "hybrid": hybrid}.get(method)
    if fn is None:
        raise ValueError(f"unknown method {method!r}")
    return fn(seed, lam, **kw)


# ---------------------------------------------------------------------------
# continuation
# ---------------------------------------------------------------------------
@dataclass
class BranchTable:
    """Rows (lam, Q, E, second L+ eigenvalue), ordered by lam descending."""

    family: str
    rows: list
    metadata: dict = field(default_factory=dict)
    states: list = field(default_factory=list, repr=False)
    end: float | None = None

    COLUMNS = ("lambda", "Q", "E", "lplus_eig2")

    def column(self, name: str) -> np.ndarray:
        return np.array([r[self.COLUMNS.index(name)] for r in self.rows])

    @property
    def truncated(self) -> bool:
        return self.end is not None


def _on_branch(tag: str, family: str) -> bool:
    if family in ("constant", "symmetric"):
        return tag == family
    # near the pitchfork asymmetric states are too balanced to be tagged; accept "other"
    return tag in (family, "other")


def continue_branch(seed_state: StationaryState, lambda_end: float, steps: int,
                    family: str | None = None, min_fraction: float = 0.125,
                    tol: float = 1e-12, spectra: bool = True,
                    max_corrector: float = 0.5) -> BranchTable:
    """Natural-parameter continuation in lam from the seed's lam to ``lambda_end``.

    Each nominal step is attempted whole; on Newton failure or a jump to
    another family it is halved, down to ``min_fraction`` of the nominal
    step, after which the branch ends.  A secant predictor in lam extrapolates
    from the two most recent accepted profiles.  A step is also rejected when
    Newton lands farther than ``max_corrector`` (relative weighted L2) from the
    prediction: past a fold or pitchfork it can otherwise converge to another
    solution that carries the same tag.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    family = family or seed_state.tag
    grid = seed_state.grid
    w = grid.weights()
    targets = np.linspace(seed_state.lam, lambda_end, steps + 1)
    nominal = (lambda_end - seed_state.lam) / steps
    first = seed_state
    if spectra and not seed_state.lplus_head:
        first = make_state(seed_state.phi, seed_state.lam, method=seed_state.method)
    states = [first]
    prev = None  # (lam, values) of the state before the current one
    cur_lam, cur = seed_state.lam, seed_state.phi.values
    end = None
    for target in targets[1:]:
        dl = nominal
        while abs(target - cur_lam) > 1e-14 * max(1.0, abs(target)):
            nxt = cur_lam + dl
            if (nxt - target) * np.sign(nominal) > 0:
                nxt = target
            if prev is not None:
                slope = (cur - prev[1]) / (cur_lam - prev[0])
                guess = cur + slope * (nxt - cur_lam)
            else:
                guess = cur
            try:
                st = newton(GraphFunction(grid, guess), nxt, tol=tol, spectra=False)
                jump = float(np.sum(w * (st.phi.values - guess) ** 2))
                ok = _on_branch(st.tag, family) and jump <= max_corrector ** 2 * float(np.sum(w * guess ** 2))
            except SolverFailure as exc:
                log.debug("continuation step to %r failed: %s", nxt, exc)
                ok = False
            if ok:
                prev = (cur_lam, cur)
                cur_lam, cur = nxt, st.phi.values
                continue
            dl *= 0.5
            if abs(dl) < min_fraction * abs(nominal) * (1 - 1e-12):
                end = nxt
                break
        if end is not None:
            # keep the furthest accepted point short of the failed target
            if cur_lam != states[-1].lam:
                states.append(make_state(GraphFunction(grid, cur.copy()), cur_lam,
                                         method="newton", spectra=spectra))
            break
        st = make_state(GraphFunction(grid, cur.copy()), cur_lam, method="newton", spectra=spectra)
        states.append(st)
    states.sort(key=lambda s: -s.lam)
    rows = [(s.lam, s.Q, s.E, s.lplus_eig2 if spectra else float("nan")) for s in states]
    meta = {"L": grid.L, "N": grid.N, "M": grid.M, "family": family, "steps": steps,
            "lambda_start": seed_state.lam, "lambda_end": lambda_end, "newton_tol": tol,
            "min_step_fraction": min_fraction, "max_corrector": max_corrector, "branch_end": end}
    return BranchTable(family=family, rows=rows, metadata=meta, states=states, end=end)


def constant_branch(grid: DumbbellGrid, lambda_start: float, lambda_end: float, steps: int,
                    spectra: bool = True) -> BranchTable:
    """The constant branch sampled on a uniform lam grid (analytic profile, no continuation needed)."""
    states = []
    for lam in np.linspace(lambda_start, lambda_end, steps + 1):
        states.append(make_state(constant_seed(grid, lam), float(lam), method="analytic", spectra=spectra))
    states.sort(key=lambda s: -s.lam)
    rows = [(s.lam, s.Q, s.E, s.lplus_eig2) for s in states]
    meta = {"L": grid.L, "N": grid.N, "M": grid.M, "family": "constant", "steps": steps,
            "lambda_start": lambda_start, "lambda_end": lambda_end, "branch_end": None}
    return BranchTable("constant", rows, meta, states)


def slope_dE_dQ(table: BranchTable) -> tuple[np.ndarray, np.ndarray]:
    """Centered differences dE/dQ on interior rows, with the lam of each interior row."""
    lam, Q, E = table.column("lambda"), table.column("Q"), table.column("E")
    return lam[1:-1], (E[2:] - E[:-2]) / (Q[2:] - Q[:-2])


def raise_if_truncated(table: BranchTable) -> None:
    if table.truncated:
        raise BranchEnd(f"branch ended at lam={table.end!r} after {len(table.rows)} rows", table.end)
