"""Dumbbell graph geometry and its uniform discretization.

The graph is a segment [-L, L] with a ring of length 2*pi attached at each
end.  Nodes are stored as one flat vector ordered

    ring_minus interior (N-1) | segment j=0..M (M+1) | ring_plus interior (N-1)

so each junction value lives once, in the segment block, and continuity across
the junctions holds by construction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import GridMismatch, NonCommensurateGrid, NonFiniteSample

RING_LENGTH = 2.0 * math.pi
EDGES = ("ring_minus", "segment", "ring_plus")


@dataclass(frozen=True)
class DumbbellGrid:
    """Uniform mesh of the dumbbell with spacing h = 2*pi/N on every edge.

    Attributes:
        L: half-length of the central segment.
        N: intervals per ring.
        M: intervals on the segment, M = N*L/pi.
        h: mesh spacing.
    """

    L: float
    N: int
    M: int
    h: float
    ring_length: float = field(default=RING_LENGTH, repr=False)

    @property
    def size(self) -> int:
        return self.M + 2 * self.N - 1

    @property
    def total_length(self) -> float:
        return 2.0 * self.L + 2.0 * self.ring_length

    # index bookkeeping -------------------------------------------------
    @property
    def ring_minus_slice(self) -> slice:
        return slice(0, self.N - 1)

    @property
    def segment_slice(self) -> slice:
        return slice(self.N - 1, self.N + self.M)

    @property
    def ring_plus_slice(self) -> slice:
        return slice(self.N + self.M, self.size)

    @property
    def left_junction(self) -> int:
        return self.N - 1

    @property
    def right_junction(self) -> int:
        return self.N - 1 + self.M

    def edge_slice(self, edge: str) -> slice:
        return {"ring_minus": self.ring_minus_slice, "segment": self.segment_slice,
                "ring_plus": self.ring_plus_slice}[edge]

    def coordinates(self) -> np.ndarray:
        """Position of every node; junctions carry their segment coordinate."""
        h, N, M, L = self.h, self.N, self.M, self.L
        i = np.arange(1, N)
        return np.concatenate([
            -L - self.ring_length + i * h,
            -L + np.arange(M + 1) * h,
            L + i * h,
        ])

    def edge_labels(self) -> np.ndarray:
        """0, 1, 2 for ring_minus, segment, ring_plus (junctions belong to the segment)."""
        return np.concatenate([
            np.zeros(self.N - 1, dtype=int),
            np.ones(self.M + 1, dtype=int),
            np.full(self.N - 1, 2, dtype=int),
        ])

    def weights(self) -> np.ndarray:
        """Composite trapezoid weights.

        Interior nodes get h; each junction touches three intervals and gets 3h/2.
        """
        w = np.full(self.size, self.h)
        w[[self.left_junction, self.right_junction]] = 1.5 * self.h
        return w

    def reflection(self) -> np.ndarray:
        """Index permutation realizing x -> -x (swaps the rings, flips the segment)."""
        N, M = self.N, self.M
        rm = np.arange(N - 1)
        seg = np.arange(N - 1, N + M)
        rp = np.arange(N + M, self.size)
        # ring_minus node i (x = -L-2pi+ih) maps to ring_plus node N-i (x = L+(N-i)h)
        return np.concatenate([rp[::-1], seg[::-1], rm[::-1]])

    def ring_flip(self, edge: str) -> np.ndarray:
        """Index permutation mirroring one ring about its midpoint (everything else fixed)."""
        perm = np.arange(self.size)
        sl = self.edge_slice(edge)
        perm[sl] = perm[sl][::-1]
        return perm

    def symmetry_group(self, generators) -> list[np.ndarray]:
        """All permutations generated by ``generators`` (closure under composition)."""
        ident = np.arange(self.size)
        group = [ident]
        seen = {ident.tobytes()}
        frontier = [ident]
        while frontier:
            nxt = []
            for g in frontier:
                for s in generators:
                    c = g[s]
                    key = c.tobytes()
                    if key not in seen:
                        seen.add(key)
                        group.append(c)
                        nxt.append(c)
            frontier = nxt
        return group

    def automorphisms(self) -> dict[str, np.ndarray]:
        return {"reflection": self.reflection(),
                "ring_minus_flip": self.ring_flip("ring_minus"),
                "ring_plus_flip": self.ring_flip("ring_plus")}

    def intervals(self) -> tuple[np.ndarray, np.ndarray]:
        """Endpoint index pairs of every mesh interval (M + 2N of them)."""
        N, M = self.N, self.M
        jl, jr = self.left_junction, self.right_junction
        rm = np.concatenate([[jl], np.arange(N - 1), [jl]])
        seg = np.arange(N - 1, N + M)
        rp = np.concatenate([[jr], np.arange(N + M, self.size), [jr]])
        left = np.concatenate([rm[:-1], seg[:-1], rp[:-1]])
        right = np.concatenate([rm[1:], seg[1:], rp[1:]])
        return left, right

    def refine(self) -> "DumbbellGrid":
        return make_grid(self.L, 2 * self.N)

    def check_same(self, other: "DumbbellGrid") -> None:
        if (self.N, self.M) != (other.N, other.M) or abs(self.L - other.L) > 1e-12:
            raise GridMismatch(f"grid (L={other.L}, N={other.N}) does not match (L={self.L}, N={self.N})")


def make_grid(L: float, N: int) -> DumbbellGrid:
    """Build the uniform dumbbell mesh with N intervals per ring.

    Raises:
        NonCommensurateGrid: if N*L/pi is not within 1e-12 of an integer.
    """
    if N < 4 or int(N) != N:
        raise ValueError(f"N must be an integer >= 4, got {N}")
    if not L > 0:
        raise ValueError(f"L must be positive, got {L}")
    N = int(N)
    ratio = N * L / math.pi
    M = round(ratio)
    if M < 1 or abs(ratio - M) > 1e-12 * max(1.0, ratio):
        raise NonCommensurateGrid(f"N*L/pi = {ratio!r} is not an integer (L={L!r}, N={N})")
    return DumbbellGrid(L=float(L), N=N, M=int(M), h=RING_LENGTH / N)


def nearest_commensurate_N(L: float, N: int, max_den: int = 64) -> int | None:
    """Smallest N' >= N making N'*L/pi integral, if L/pi is a fraction with small denominator."""
    from fractions import Fraction
    r = Fraction(L / math.pi).limit_denominator(max_den)
    if abs(float(r) * math.pi - L) > 1e-12 * max(1.0, L):
        return None
    q = r.denominator
    return max(q, -(-max(N, 4) // q) * q)


@dataclass
class GraphFunction:
    """Real function on the dumbbell, stored in the flat node ordering of ``grid``."""

    grid: DumbbellGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.size,):
            raise GridMismatch(f"expected {self.grid.size} values, got shape {self.values.shape}")

    def edge_values(self, edge: str) -> np.ndarray:
        """Values along one edge, with junction copies at both ends.

        Lengths are N+1 for the rings and M+1 for the segment.
        """
        g, v = self.grid, self.values
        if edge == "segment":
            return v[g.segment_slice].copy()
        j = g.left_junction if edge == "ring_minus" else g.right_junction
        inner = v[g.edge_slice(edge)]
        return np.concatenate([[v[j]], inner, [v[j]]])

    @classmethod
    def from_edges(cls, grid: DumbbellGrid, ring_minus, segment, ring_plus) -> "GraphFunction":
        """Inverse of :meth:`edge_values`; junction copies must equal segment endpoints."""
        rm, seg, rp = (np.asarray(a, dtype=float) for a in (ring_minus, segment, ring_plus))
        if rm.shape != (grid.N + 1,) or rp.shape != (grid.N + 1,) or seg.shape != (grid.M + 1,):
            raise GridMismatch("edge array lengths do not match the grid")
        if rm[0] != seg[0] or rm[-1] != seg[0] or rp[0] != seg[-1] or rp[-1] != seg[-1]:
            raise ValueError("junction copies differ from the segment endpoints")
        return cls(grid, np.concatenate([rm[1:-1], seg, rp[1:-1]]))

    def inner(self, other: "GraphFunction") -> float:
        self.grid.check_same(other.grid)
        return float(np.sum(self.grid.weights() * self.values * other.values))

    def norm(self) -> float:
        return math.sqrt(self.inner(self))

    def reflected(self) -> "GraphFunction":
        return GraphFunction(self.grid, self.values[self.grid.reflection()])

    def copy(self) -> "GraphFunction":
        return GraphFunction(self.grid, self.values.copy())


def sample(grid: DumbbellGrid, f: Callable[[np.ndarray, str], np.ndarray]) -> GraphFunction:
    """Evaluate ``f(x, edge)`` at every node.

    ``f`` receives a coordinate array and an edge name from :data:`EDGES`.
    Junction nodes are evaluated with ``edge="segment"``.
    """
    x = grid.coordinates()
    out = np.empty(grid.size)
    for edge in EDGES:
        sl = grid.edge_slice(edge)
        out[sl] = np.broadcast_to(np.asarray(f(x[sl], edge), dtype=float), x[sl].shape)
    if not np.all(np.isfinite(out)):
        bad = int(np.flatnonzero(~np.isfinite(out))[0])
        raise NonFiniteSample(f"non-finite sample at node {bad} (x={x[bad]!r})")
    return GraphFunction(grid, out)


def invariant_group(u: np.ndarray, grid: DumbbellGrid, rtol: float = 1e-10) -> list[np.ndarray]:
    """Group of graph automorphisms leaving ``u`` unchanged up to ``rtol * max|u|``."""
    scale = float(np.max(np.abs(u))) or 1.0
    gens = [p for p in grid.automorphisms().values() if np.max(np.abs(u - u[p])) <= rtol * scale]
    return grid.symmetry_group(gens)


def symmetrize(u: np.ndarray, group: list[np.ndarray]) -> np.ndarray:
    """Average of ``u`` over a permutation group (projection onto its invariant subspace)."""
    if len(group) <= 1:
        return u
    return sum(u[p] for p in group) / len(group)


def graph_distance(grid: DumbbellGrid, center: str) -> np.ndarray:
    """Graph distance of every node to x=0 (``center="segment"``) or to x=L+pi (``"ring"``)."""
    x = grid.coordinates()
    lab = grid.edge_labels()
    L, pi = grid.L, math.pi
    d = np.empty_like(x)
    if center == "segment":
        seg = lab == 1
        d[seg] = np.abs(x[seg])
        for edge, xj in ((0, -L), (2, L)):
            s = np.abs(x[lab == edge] - xj)
            d[lab == edge] = L + np.minimum(s, grid.ring_length - s)
    elif center == "ring":
        mid = L + pi
        on = lab == 2
        d[on] = np.abs(x[on] - mid)
        d[lab == 1] = pi + (L - x[lab == 1])
        s = np.abs(x[lab == 0] + L)
        d[lab == 0] = pi + 2 * L + np.minimum(s, grid.ring_length - s)
    else:
        raise ValueError(f"unknown center {center!r}")
    return d
