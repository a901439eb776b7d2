"""Relational Sinkhorn matching (MST-Direct).

A joint sample is matched against a randomly permuted copy of itself (the
anchors). Matching uses entropy-regularised optimal transport on cosine
similarity of the standardised rows, with an extra reward for couplings that
send grid neighbours to grid neighbours. The soft coupling is rounded to a
permutation, so the output is always a reshuffling of the input rows.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericError, ParameterError
from .fieldgen import Field
from .grid import AdjacencyGraph, Grid2D, coordinates, knn_adjacency
from .rng import Rng

KERNEL_FLOOR = 1e-300


@dataclass(frozen=True)
class SinkhornParams:
    beta: float = 35.0
    lam: float = 2.2
    k: int = 8
    max_outer: int = 30
    max_sinkhorn: int = 200
    tol_marginal: float = 1e-6

    def __post_init__(self):
        if not self.beta > 0:
            raise ParameterError(f"beta must be positive, got {self.beta}")
        if not self.lam >= 0:
            raise ParameterError(f"lambda must be nonnegative, got {self.lam}")
        if self.k < 1 or self.max_outer < 1 or self.max_sinkhorn < 1:
            raise ParameterError("k, max_outer and max_sinkhorn must be positive")
        if not self.tol_marginal > 0:
            raise ParameterError("tol_marginal must be positive")


@dataclass(frozen=True, eq=False)
class CouplingMatrix:
    """Soft assignment with (approximately) uniform 1/n marginals.

    ``marginal_error`` is the largest absolute deviation of any row or column
    sum from 1/n; ``converged`` says whether it got below the tolerance.
    """

    m: np.ndarray
    converged: bool
    marginal_error: float
    iterations: int
    col_scaling: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.m.shape[0]


@dataclass(frozen=True)
class NormStats:
    mean: np.ndarray
    std: np.ndarray


def _marginal_error(m: np.ndarray, target: float) -> float:
    return max(np.abs(m.sum(axis=1) - target).max(), np.abs(m.sum(axis=0) - target).max())


def sinkhorn_normalize(kernel, max_iter: int = 200, tol: float = 1e-6, init=None) -> CouplingMatrix:
    """Scale ``kernel`` to ``diag(r) K diag(c)`` with all marginals 1/n.

    Returns the iterate with the smallest marginal error seen; ``converged``
    is False if it never got below ``tol`` within ``max_iter`` sweeps.
    ``init`` optionally seeds the column scaling ``c`` (default all ones).
    """
    K = np.asarray(kernel, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ParameterError("kernel must be square")
    if not np.all(np.isfinite(K)):
        raise NumericError("kernel has non-finite entries")
    if np.any(K < 0):
        raise ParameterError("kernel must be nonnegative")
    K = np.maximum(K, KERNEL_FLOOR)
    n = K.shape[0]
    target = 1.0 / n

    r = np.ones(n)
    c = np.ones(n) if init is None else np.asarray(init, dtype=float).copy()
    if c.shape != (n,) or not np.all(np.isfinite(c)) or np.any(c <= 0):
        raise ParameterError("init must be a positive finite vector of length n")
    best = (np.inf, r, c, 0)
    for it in range(1, max_iter + 1):
        r = target / (K @ c)
        c = target / (K.T @ r)
        if not (np.all(np.isfinite(r)) and np.all(np.isfinite(c))):
            break
        # columns are exact after the c update; rows carry the residual
        err = np.abs(r * (K @ c) - target).max()
        if err < best[0]:
            best = (err, r, c, it)
        if err < tol:
            break

    _, r, c, it = best
    if it == 0:
        raise NumericError("Sinkhorn scaling overflowed on the first sweep")
    m = r[:, None] * K * c[None, :]
    err = _marginal_error(m, target)
    return CouplingMatrix(m=m, converged=bool(err < tol), marginal_error=float(err), iterations=it, col_scaling=c)


def unit_rows(a) -> np.ndarray:
    """Scale rows to unit Euclidean norm; zero rows stay zero."""
    a = np.asarray(a, dtype=float)
    norms = np.linalg.norm(a, axis=1, keepdims=True)
    safe = np.where(norms > 0, norms, 1.0)
    return np.where(norms > 0, a / safe, 0.0)


def relational_match(v_unit, u_unit, adj: AdjacencyGraph, params: SinkhornParams) -> CouplingMatrix:
    """Alternate relational-term updates with full Sinkhorn solves.

    Each outer step sets ``log K = beta * V U^T + lam * n * A M A^T`` from
    the current coupling ``M`` (uniform to start) and re-solves. The
    returned coupling is the last one; its ``converged`` flag and
    ``marginal_error`` summarise the worst of all outer solves. Each solve
    is warm-started from the previous column scaling (the row-max shift
    only moves the row scaling).
    """
    v = np.asarray(v_unit, dtype=float)
    u = np.asarray(u_unit, dtype=float)
    n = v.shape[0]
    if u.shape != v.shape or adj.n != n:
        raise ParameterError("v_unit, u_unit and adjacency disagree in size")

    similarity = params.beta * (v @ u.T)
    A = adj.to_sparse()
    m = np.full((n, n), 1.0 / n**2)
    # with no relational weight every outer step solves the same problem
    n_outer = params.max_outer if params.lam > 0 else 1

    converged = True
    worst = 0.0
    total_iters = 0
    c = None
    for _ in range(n_outer):
        log_k = similarity
        if params.lam > 0:
            relational = A @ (A @ m.T).T  # A M A^T, A symmetric
            log_k = similarity + params.lam * n * relational
        log_k = log_k - log_k.max(axis=1, keepdims=True)
        coupling = sinkhorn_normalize(np.exp(log_k), params.max_sinkhorn, params.tol_marginal, init=c)
        m = coupling.m
        c = coupling.col_scaling
        converged &= coupling.converged
        worst = max(worst, coupling.marginal_error)
        total_iters += coupling.iterations

    return CouplingMatrix(m=m, converged=converged, marginal_error=worst, iterations=total_iters)


def greedy_round(coupling) -> np.ndarray:
    """Round a soft coupling to a permutation, most confident rows first.

    Ties in confidence and in anchor choice go to the lower index.
    """
    m = np.asarray(getattr(coupling, "m", coupling), dtype=float)
    n = m.shape[0]
    confidence = m.max(axis=1)
    order = np.argsort(-confidence, kind="stable")
    free = np.ones(n, dtype=bool)
    pi = np.empty(n, dtype=np.int64)
    for i in order:
        row = np.where(free, m[i], -np.inf)
        j = int(np.argmax(row))
        pi[i] = j
        free[j] = False
    return pi


@dataclass(frozen=True, eq=False)
class MSTResult:
    x: Field
    y: Field
    coupling: CouplingMatrix
    permutation: np.ndarray  # output row i is input row permutation[i]
    stats: NormStats


def mst_direct_detailed(
    x: Field,
    y: Field,
    grid: Grid2D,
    params: SinkhornParams = SinkhornParams(),
    rng: Rng | None = None,
    permute_anchors: bool = True,
) -> MSTResult:
    """Run the full matching pipeline and keep the intermediate products.

    ``permute_anchors=False`` uses the data in its own order as the anchors,
    which is only useful for diagnostics.
    """
    if x.grid != grid or y.grid != grid:
        raise ParameterError("x and y must live on the given grid")
    V = np.column_stack([x.values, y.values])
    n = V.shape[0]
    mu = V.mean(axis=0)
    sigma = V.std(axis=0)
    if np.any(sigma == 0):
        raise ParameterError("cannot normalise a variable with zero variance")
    stats = NormStats(mean=mu, std=sigma)

    v_norm = (V - mu) / sigma
    v_unit = unit_rows(v_norm)
    if permute_anchors:
        anchor_idx = (rng if rng is not None else Rng()).permutation(n)
    else:
        anchor_idx = np.arange(n)
    u_unit = unit_rows(v_norm[anchor_idx])

    adj = knn_adjacency(coordinates(grid), params.k)
    coupling = relational_match(v_unit, u_unit, adj, params)
    pi = greedy_round(coupling)

    # U[pi] * sigma + mu is row anchor_idx[pi] of V; index V directly so the
    # output is a bit-exact reshuffle of the input pairs
    source = anchor_idx[pi]
    out = V[source]
    return MSTResult(
        x=Field(out[:, 0], grid),
        y=Field(out[:, 1], grid),
        coupling=coupling,
        permutation=source,
        stats=stats,
    )


def mst_direct(x: Field, y: Field, grid: Grid2D, params: SinkhornParams = SinkhornParams(), rng: Rng | None = None):
    res = mst_direct_detailed(x, y, grid, params, rng)
    return res.x, res.y
