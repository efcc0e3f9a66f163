"""Discrete Kirchhoff Laplacian, the linearizations L+ / L-, and small eigen-solves.

Two junction discretizations are available.

``"kirchhoff"`` (default)
    Finite-volume row at each junction: the half-cells of the three incident
    edges are merged, giving ``(2/(3h^2)) * (3 u_J - sum of the three neighbours)``.
    With trapezoid weights W the product W*A is exactly symmetric, the
    quadratic form is ``sum (du)^2 / h`` over all mesh intervals, and the
    zero-flux condition is the natural boundary condition of that form.

``"one-sided"``
    The junction value is eliminated through the second-order one-sided flux
    balance ``u_J = (4 * sum u_1 - sum u_2) / 9`` (u_1, u_2 the first and
    second neighbours on each edge).  The reduced interior operator is
    prolonged back to full size; junction rows then hold an interpolated
    second derivative and ``8/h^2`` on the constraint complement.  This matrix
    is not W-symmetric, so its eigenvalues come from a general solver.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .errors import ConvergenceFailure
from .grid import DumbbellGrid, GraphFunction

SCHEMES = ("kirchhoff", "one-sided")


@dataclass(frozen=True)
class DiscreteOperator:
    """Sparse D x D matrix on a dumbbell grid.

    ``potential`` is the diagonal added to the bare Laplacian (None for -Delta).
    """

    grid: DumbbellGrid
    matrix: sp.csr_matrix
    scheme: str = "kirchhoff"
    potential: np.ndarray | None = None

    def apply(self, u) -> np.ndarray:
        v = u.values if isinstance(u, GraphFunction) else np.asarray(u, dtype=float)
        return self.matrix @ v

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def shifted(self, shift: float) -> "DiscreteOperator":
        pot = np.full(self.grid.size, float(shift))
        if self.potential is not None:
            pot = pot + self.potential
        return DiscreteOperator(self.grid, (self.matrix + sp.identity(self.grid.size) * shift).tocsr(),
                                self.scheme, pot)


def _neighbours(grid: DumbbellGrid):
    """(junction, first neighbours, second neighbours) for both junctions."""
    rm = np.arange(grid.ring_minus_slice.start, grid.ring_minus_slice.stop)
    rp = np.arange(grid.ring_plus_slice.start, grid.ring_plus_slice.stop)
    jl, jr = grid.left_junction, grid.right_junction
    out = []
    for j, ring, seg_step in ((jl, rm, +1), (jr, rp, -1)):
        first = [ring[0], ring[-1], j + seg_step]
        # with a single segment interval the second neighbour is the other junction
        second_seg = j + 2 * seg_step if grid.M >= 2 else None
        second = [ring[1], ring[-2], second_seg]
        out.append((j, first, second))
    return out


def _kirchhoff_matrix(grid: DumbbellGrid) -> sp.csr_matrix:
    h2 = grid.h ** 2
    left, right = grid.intervals()
    D = grid.size
    # graph Laplacian of the mesh, then divide each row by its trapezoid weight * h
    rows = np.concatenate([left, right, left, right])
    cols = np.concatenate([right, left, left, right])
    vals = np.concatenate([-np.ones_like(left), -np.ones_like(left),
                           np.ones_like(left), np.ones_like(left)]).astype(float)
    G = sp.coo_matrix((vals, (rows, cols)), shape=(D, D)).tocsr()
    scale = grid.h / (grid.weights() * h2)
    return (sp.diags(scale) @ G).tocsr()


def _one_sided_matrix(grid: DumbbellGrid) -> sp.csr_matrix:
    D = grid.size
    A = _kirchhoff_matrix(grid)  # interior rows are the plain 3-point stencil
    junctions = [grid.left_junction, grid.right_junction]
    keep = np.setdiff1d(np.arange(D), junctions)
    R = sp.identity(D, format="csr")[keep]
    P = sp.lil_matrix((D, keep.size))
    pos = {node: k for k, node in enumerate(keep)}
    for node, k in pos.items():
        P[node, k] = 1.0
    for j, first, second in _neighbours(grid):
        for n1 in first:
            P[j, pos[n1]] += 4.0 / 9.0
        for n2 in second:
            if n2 is not None:
                P[j, pos[n2]] -= 1.0 / 9.0
    P = P.tocsr()
    Ar = R @ A @ P
    PR = P @ R
    full = P @ Ar @ R + (8.0 / grid.h ** 2) * (sp.identity(D) - PR)
    return sp.csr_matrix(full)


def build_laplacian(grid: DumbbellGrid, scheme: str = "kirchhoff") -> DiscreteOperator:
    """Matrix of -Delta with Kirchhoff junction conditions (positive semidefinite)."""
    if scheme == "kirchhoff":
        mat = _kirchhoff_matrix(grid)
    elif scheme == "one-sided":
        mat = _one_sided_matrix(grid)
    else:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    return DiscreteOperator(grid, mat, scheme, None)


def _with_potential(lap: DiscreteOperator, pot: np.ndarray) -> DiscreteOperator:
    mat = (lap.matrix + sp.diags(pot)).tocsr()
    return DiscreteOperator(lap.grid, mat, lap.scheme, pot)


def build_l_plus(grid: DumbbellGrid, phi: GraphFunction, lam: float,
                 scheme: str = "kirchhoff") -> DiscreteOperator:
    """-Delta - lam - 6 phi^2, the linearization acting on real perturbations."""
    grid.check_same(phi.grid)
    return _with_potential(build_laplacian(grid, scheme), -lam - 6.0 * phi.values ** 2)


def build_l_minus(grid: DumbbellGrid, phi: GraphFunction, lam: float,
                  scheme: str = "kirchhoff") -> DiscreteOperator:
    """-Delta - lam - 2 phi^2, the linearization acting on imaginary perturbations."""
    grid.check_same(phi.grid)
    return _with_potential(build_laplacian(grid, scheme), -lam - 2.0 * phi.values ** 2)


def weighted_asymmetry(op: DiscreteOperator) -> float:
    """Relative Frobenius asymmetry of W^(1/2) A W^(-1/2)."""
    s = np.sqrt(op.grid.weights())
    S = (op.dense() * s[:, None]) / s[None, :]
    return float(np.linalg.norm(S - S.T) / np.linalg.norm(S))


def dirichlet_form(grid: DumbbellGrid, u: np.ndarray, v: np.ndarray | None = None) -> float:
    """sum over mesh intervals of du*dv/h; equals u^T W A v for the kirchhoff scheme."""
    left, right = grid.intervals()
    du = u[right] - u[left]
    dv = du if v is None else v[right] - v[left]
    return float(np.sum(du * dv) / grid.h)


def rayleigh_quotient(op: DiscreteOperator, v: np.ndarray) -> float:
    """Energy-form Rayleigh quotient of a kirchhoff-scheme operator."""
    w = op.grid.weights()
    pot = 0.0 if op.potential is None else np.sum(w * op.potential * v * v)
    return (dirichlet_form(op.grid, v) + pot) / float(np.sum(w * v * v))


def eigen_smallest(op: DiscreteOperator, count: int) -> list[tuple[float, GraphFunction]]:
    """The ``count`` algebraically smallest eigenpairs, ascending.

    Eigenvectors are normalized in the trapezoid-weighted L2 norm.  For the
    kirchhoff scheme a dense symmetric solver runs on W^(1/2) A W^(-1/2);
    for the one-sided scheme a general eigensolver is used and the (real)
    spectrum is sorted.
    """
    grid = op.grid
    D = grid.size
    if not 1 <= count <= D:
        raise ValueError(f"count must be in [1, {D}], got {count}")
    w = grid.weights()
    s = np.sqrt(w)
    try:
        if op.scheme == "kirchhoff":
            S = (op.dense() * s[:, None]) / s[None, :]
            S = 0.5 * (S + S.T)
            vals, vecs = scipy.linalg.eigh(S, subset_by_index=[0, count - 1])
            vecs = vecs / s[:, None]
        else:
            allvals, allvecs = scipy.linalg.eig(op.dense())
            if np.max(np.abs(allvals.imag)) > 1e-6 * max(1.0, np.max(np.abs(allvals.real))):
                raise ConvergenceFailure("one-sided operator produced complex eigenvalues",
                                         {"max_imag": float(np.max(np.abs(allvals.imag)))})
            order = np.argsort(allvals.real)[:count]
            vals = allvals.real[order]
            vecs = allvecs.real[:, order]
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise ConvergenceFailure(f"eigensolver failed: {exc}", {"size": D, "scheme": op.scheme}) from exc
    out = []
    for k in range(count):
        v = vecs[:, k]
        v = v / math.sqrt(float(np.sum(w * v * v)))
        # fix the sign so the largest-magnitude entry is positive (deterministic output)
        if v[np.argmax(np.abs(v))] < 0:
            v = -v
        out.append((float(vals[k]), GraphFunction(grid, v)))
    return out


def sign_threshold(lam: float) -> float:
    """Eigenvalues below this count as negative."""
    return -1e-8 * max(1.0, abs(lam))


def negative_count(eigenvalues, lam: float) -> int:
    thr = sign_threshold(lam)
    return int(sum(1 for e in eigenvalues if e < thr))
