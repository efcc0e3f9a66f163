"""Multiprecision polish of stationary states and of tiny L+ eigenvalues.

On the symmetric branch at large |lam| and long segments the second
eigenvalue of L+ is of order e^{-2 L |lam|^(1/2)}, far below double-precision
roundoff of the operator (~1e-13).  Its sign is recovered here by

1. Newton-polishing the profile in mpmath arithmetic, and
2. inverse iteration at shift 0 for the eigenvalue closest to zero,

with every linear solve done by eliminating the three edge chains
(tridiagonal Thomas sweeps) onto the two junction unknowns.  Only the
kirchhoff scheme is supported.
"""
from __future__ import annotations

import math

import mpmath as mp
import numpy as np

from .grid import DumbbellGrid, GraphFunction


class _Chains:
    """Node layout of the dumbbell as three paths hanging off two junctions."""

    def __init__(self, grid: DumbbellGrid):
        N, M = grid.N, grid.M
        jl, jr = grid.left_junction, grid.right_junction
        self.grid = grid
        self.jl, self.jr = jl, jr
        self.chains = [(list(range(0, N - 1)), jl, jl)]
        if M >= 2:
            self.chains.append((list(range(jl + 1, jr)), jl, jr))
        self.chains.append((list(range(jr + 1, grid.size)), jr, jr))
        # direct junction-junction coupling when the segment has a single interval
        self.direct = M == 1


def _thomas(diag, off, rhs_list, lower=None, upper=None):
    """Solve tridiagonal systems for several right-hand sides.

    Off-diagonals are the constant ``off`` unless ``lower``/``upper`` lists
    (row i couples to i-1 via lower[i], to i+1 via upper[i]) are given.
    """
    n = len(diag)
    lower = lower or [off] * n
    upper = upper or [off] * n
    c = [mp.mpf(0)] * n
    d = [list() for _ in rhs_list]
    denom = diag[0]
    c[0] = upper[0] / denom
    for k, r in enumerate(rhs_list):
        d[k].append(r[0] / denom)
    for i in range(1, n):
        denom = diag[i] - lower[i] * c[i - 1]
        c[i] = upper[i] / denom
        for k, r in enumerate(rhs_list):
            d[k].append((r[i] - lower[i] * d[k][i - 1]) / denom)
    out = []
    for k in range(len(rhs_list)):
        x = [mp.mpf(0)] * n
        x[-1] = d[k][-1]
        for i in range(n - 2, -1, -1):
            x[i] = d[k][i] - c[i] * x[i + 1]
        out.append(x)
    return out


class MPOperator:
    """-Delta + diag(potential) on the dumbbell in mpmath arithmetic (kirchhoff scheme)."""

    def __init__(self, grid: DumbbellGrid, potential):
        self.grid = grid
        self.layout = _Chains(grid)
        h = 2 * mp.pi / grid.N
        self.inv_h2 = 1 / h ** 2
        self.w = [h] * grid.size
        for j in (grid.left_junction, grid.right_junction):
            self.w[j] = 3 * h / 2
        self.pot = [mp.mpf(p) for p in potential]
        left, right = grid.intervals()
        self.nbrs = [[] for _ in range(grid.size)]
        for a, b in zip(left.tolist(), right.tolist()):
            self.nbrs[a].append(b)
            self.nbrs[b].append(a)

    def _row_scale(self, i):
        # interior rows: 1/h^2 per neighbour; junction rows: 2/(3h^2) per neighbour
        return self.inv_h2 if len(self.nbrs[i]) == 2 else 2 * self.inv_h2 / 3

    def apply(self, u):
        out = []
        for i, nb in enumerate(self.nbrs):
            s = self._row_scale(i)
            out.append(s * (len(nb) * u[i] - sum(u[j] for j in nb)) + self.pot[i] * u[i])
        return out

    def solve(self, b):
        lay, D = self.layout, self.grid.size
        s = self.inv_h2
        # each chain: x_chain = y0 + yl * J_left + yr * J_right
        pieces = []
        for nodes, jl, jr in lay.chains:
            diag = [2 * s + self.pot[i] for i in nodes]
            n = len(nodes)
            e_first = [s] + [mp.mpf(0)] * (n - 1)
            e_last = [mp.mpf(0)] * (n - 1) + [s]
            y0, yf, yl = _thomas(diag, -s, [[b[i] for i in nodes], e_first, e_last])
            pieces.append((nodes, jl, jr, y0, yf, yl))
        # junction equations: a_J * J - (2/(3h^2)) * sum(neighbours) = b_J
        js = [lay.jl, lay.jr]
        mat = mp.zeros(2, 2)
        rhs = mp.matrix(2, 1)
        c = 2 * s / 3
        for r, J in enumerate(js):
            mat[r, r] += 3 * c + self.pot[J]
            rhs[r] = b[J]
            for nodes, jl, jr, y0, yf, yl in pieces:
                # a single-node chain touches each junction once, not twice
                ends = ((0, nodes[0]),) if len(nodes) == 1 else ((0, nodes[0]), (-1, nodes[-1]))
                for end, node in ends:
                    if node not in self.nbrs[J]:
                        continue
                    # value at this chain end = y0 + yf*J_first_side + yl*J_last_side
                    rhs[r] += c * y0[end]
                    mat[r, js.index(jl)] -= c * yf[end]
                    mat[r, js.index(jr)] -= c * yl[end]
            if lay.direct:
                mat[r, 1 - r] -= c
        jv = mp.lu_solve(mat, rhs)
        x = [mp.mpf(0)] * D
        x[lay.jl], x[lay.jr] = jv[0], jv[1]
        for nodes, jl, jr, y0, yf, yl in pieces:
            a, bb = x[jl], x[jr]
            for k, i in enumerate(nodes):
                x[i] = y0[k] + yf[k] * a + yl[k] * bb
        return x

    def inner(self, u, v):
        return mp.fsum(wi * a * b for wi, a, b in zip(self.w, u, v))


def polish_state(phi: GraphFunction, lam: float, dps: int = 50, max_iter: int = 12):
    """Newton-polish a stationary profile in ``dps``-digit arithmetic.

    Returns the profile as a list of mpf values and the final weighted residual.
    """
    grid = phi.grid
    with mp.workdps(dps):
        lam_mp = mp.mpf(lam)
        u = [mp.mpf(float(x)) for x in phi.values]
        base = MPOperator(grid, [0] * grid.size)
        tol = mp.mpf(10) ** (-(dps - 8))
        res = None
        for _ in range(max_iter):
            Au = base.apply(u)
            F = [a - 2 * x ** 3 - lam_mp * x for a, x in zip(Au, u)]
            res = mp.sqrt(base.inner(F, F))
            if res < tol:
                break
            jac = MPOperator(grid, [-lam_mp - 6 * x ** 2 for x in u])
            step = jac.solve(F)
            u = [x - d for x, d in zip(u, step)]
        return u, res


def smallest_magnitude_eigenvalue(grid: DumbbellGrid, potential, start, dps: int = 50,
                                  iters: int = 6):
    """Eigenvalue of -Delta + diag(potential) nearest to zero, by inverse iteration at shift 0.

    ``start`` should overlap the wanted eigenvector (e.g. its double-precision
    approximation).  Returns (eigenvalue, eigenvector) in mpf.
    """
    with mp.workdps(dps):
        op = MPOperator(grid, potential)
        x = [mp.mpf(float(v)) for v in start]
        lam_old = None
        for _ in range(iters):
            nrm = mp.sqrt(op.inner(x, x))
            x = [v / nrm for v in x]
            y = op.solve(x)
            nrm_y = mp.sqrt(op.inner(y, y))
            x = [v / nrm_y for v in y]
            Ax = op.apply(x)
            lam_new = op.inner(x, Ax) / op.inner(x, x)
            if lam_old is not None and abs(lam_new - lam_old) <= mp.mpf(10) ** (-(dps - 10)) * (abs(lam_new) + mp.mpf(10) ** (-dps)):
                break
            lam_old = lam_new
        return lam_new, x


def refined_lplus_eigenvalue(phi: GraphFunction, lam: float, start: np.ndarray, dps: int = 50) -> float:
    """High-precision value of the L+ eigenvalue nearest zero, for a double-precision state."""
    u, _ = polish_state(phi, lam, dps=dps)
    with mp.workdps(dps):
        pot = [-mp.mpf(lam) - 6 * x ** 2 for x in u]
    val, _ = smallest_magnitude_eigenvalue(phi.grid, pot, start, dps=dps)
    return float(val)


def lattice_soliton_charge(h: float, lam: float, dps: int = 50, decay_lengths: float = 60.0):
    """Charge h * sum(phi_j^2) of the on-site discrete soliton on the infinite lattice hZ.

    Solves (2 phi_j - phi_{j-1} - phi_{j+1}) / h^2 - 2 phi_j^3 - lam phi_j = 0
    for the even, decaying solution peaked at j = 0 (truncated after
    ``decay_lengths / |lam|^(1/2)``, so the neglected tail is ~e^(-2 decay_lengths)).
    As h -> 0 the charge tends to 2 |lam|^(1/2).
    """
    with mp.workdps(dps):
        h_mp, lam_mp = mp.mpf(h), mp.mpf(lam)
        mu = mp.sqrt(-lam_mp)
        n = int(math.ceil(decay_lengths / (float(mu) * h))) + 1
        s = 1 / h_mp ** 2
        u = [mu / mp.cosh(mu * j * h_mp) for j in range(n)]
        lower = [mp.mpf(0)] + [-s] * (n - 1)
        upper = [-2 * s] + [-s] * (n - 1)  # phi_{-1} = phi_1
        tol = mp.mpf(10) ** (-(dps - 8))
        for _ in range(30):
            F = []
            for j in range(n):
                left = u[j - 1] if j > 0 else u[1]
                right = u[j + 1] if j + 1 < n else 0
                F.append(s * (2 * u[j] - left - right) - 2 * u[j] ** 3 - lam_mp * u[j])
            if max(abs(f) for f in F) < tol:
                break
            diag = [2 * s - 6 * x ** 2 - lam_mp for x in u]
            step, = _thomas(diag, -s, [F], lower=lower, upper=upper)
            u = [x - d for x, d in zip(u, step)]
        return h_mp * (u[0] ** 2 + 2 * mp.fsum(x ** 2 for x in u[1:]))


def charge_excess(phi: GraphFunction, lam: float, dps: int = 50) -> float:
    """Q(phi) minus the lattice-soliton charge at the same spacing, both in multiprecision.

    The O(h^2) discretization errors of the two charges cancel to leading
    order, leaving the (possibly exponentially small) effect of the finite
    graph on a single localized soliton.  The profile is Newton-polished
    first, so results far below double-precision resolution are meaningful.
    """
    u, _ = polish_state(phi, lam, dps=dps)
    with mp.workdps(dps):
        grid = phi.grid
        h = 2 * mp.pi / grid.N
        w = [h] * grid.size
        for j in (grid.left_junction, grid.right_junction):
            w[j] = 3 * h / 2
        q = mp.fsum(wi * x ** 2 for wi, x in zip(w, u))
        return float(q - lattice_soliton_charge(h, lam, dps=dps))
