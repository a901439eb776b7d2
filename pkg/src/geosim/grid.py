"""Regular 2-D grids and k-nearest-neighbour adjacency over their points.

Point ``i`` of an ``nx`` x ``ny`` grid sits at ``(i % nx, i // nx) * spacing``.
Every module in the package uses this row-major flattening.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.spatial.distance import cdist

from .errors import ParameterError


@dataclass(frozen=True)
class Grid2D:
    nx: int
    ny: int
    spacing: float = 1.0

    def __post_init__(self):
        if int(self.nx) != self.nx or int(self.ny) != self.ny:
            raise ParameterError("grid dimensions must be integers")
        if self.nx < 2 or self.ny < 2:
            raise ParameterError(f"grid must be at least 2x2, got {self.nx}x{self.ny}")
        if not self.spacing > 0:
            raise ParameterError(f"spacing must be positive, got {self.spacing}")

    @property
    def n(self) -> int:
        return self.nx * self.ny

    @property
    def shape(self) -> tuple[int, int]:
        """Array shape (rows, cols) = (ny, nx) of a field reshaped row-major."""
        return (self.ny, self.nx)


def coordinates(grid: Grid2D) -> np.ndarray:
    """Return the ``(n, 2)`` array of point coordinates in row-major order."""
    idx = np.arange(grid.n)
    return np.column_stack([idx % grid.nx, idx // grid.nx]).astype(float) * grid.spacing


@dataclass(frozen=True)
class AdjacencyGraph:
    """Symmetric, unweighted graph on ``n`` nodes.

    ``edges`` holds each unordered pair once as ``(i, j)`` with ``i < j``.
    """

    n: int
    edges: frozenset = field(default_factory=frozenset)

    def neighbors(self, i: int) -> list[int]:
        return sorted({b if a == i else a for a, b in self.edges if i in (a, b)})

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=int)
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        return deg

    def to_sparse(self) -> sp.csr_matrix:
        """Binary symmetric adjacency matrix."""
        if not self.edges:
            return sp.csr_matrix((self.n, self.n))
        e = np.array(sorted(self.edges))
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        data = np.ones(len(rows))
        return sp.csr_matrix((data, (rows, cols)), shape=(self.n, self.n))


def knn_adjacency(points, k: int) -> AdjacencyGraph:
    """Union-symmetrised k-NN graph by Euclidean distance.

    Ties at the k-th distance admit the lowest node indices first.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ParameterError("points must be an (n, 2) array")
    n = len(pts)
    if k < 1 or k >= n:
        raise ParameterError(f"k must satisfy 1 <= k < n={n}, got {k}")

    d = cdist(pts, pts)
    np.fill_diagonal(d, np.inf)
    # stable sort on distance keeps index order among equal distances
    order = np.argsort(d, axis=1, kind="stable")[:, :k]
    edges = set()
    for i in range(n):
        for j in order[i]:
            j = int(j)
            edges.add((i, j) if i < j else (j, i))
    return AdjacencyGraph(n=n, edges=frozenset(edges))
