"""Gaussian copula and joint-covariance (LU/Cholesky) simulation baselines.

Both methods simulate correlated Gaussian fields and then map each variable
back onto its original sample values by rank, so the per-variable marginals
are reproduced exactly while the joint shape is Gaussian.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg
from scipy.spatial.distance import cdist
from scipy.stats import norm, rankdata

from .errors import NumericError, ParameterError
from .fieldgen import Field, fftma_field
from .grid import Grid2D, coordinates
from .rng import Rng
from .variogram import VariogramModel, covariance


def normal_scores(values) -> np.ndarray:
    """Average-rank normal scores at plotting position (rank - 0.5) / n."""
    v = np.asarray(values, dtype=float)
    return norm.ppf((rankdata(v, method="average") - 0.5) / v.size)


def estimate_rho(x, y, space: str = "scores") -> float:
    """Pearson correlation of ``x`` and ``y``, on normal scores or raw values."""
    x = np.asarray(getattr(x, "values", x), dtype=float)
    y = np.asarray(getattr(y, "values", y), dtype=float)
    if np.unique(x).size < 2 or np.unique(y).size < 2:
        raise ParameterError("each variable needs at least two distinct values")
    if space == "scores":
        x, y = normal_scores(x), normal_scores(y)
    elif space != "raw":
        raise ParameterError(f"unknown correlation space {space!r}")
    rho = float(np.corrcoef(x, y)[0, 1])
    return float(np.clip(rho, -1.0, 1.0))


def rank_back_transform(gaussian, original) -> np.ndarray:
    """Give the r-th smallest Gaussian value the r-th smallest original value."""
    g = np.asarray(gaussian, dtype=float)
    out = np.empty_like(g)
    out[np.argsort(g, kind="stable")] = np.sort(np.asarray(original, dtype=float))
    return out


def _check_inputs(x: Field, y: Field, grid: Grid2D):
    if x.grid != grid or y.grid != grid:
        raise ParameterError("x and y must live on the given grid")


def gaussian_copula_sim(
    x: Field,
    y: Field,
    grid: Grid2D,
    model_x: VariogramModel,
    model_y: VariogramModel,
    rng: Rng,
    rho_space: str = "scores",
) -> tuple[Field, Field]:
    _check_inputs(x, y, grid)
    rho = estimate_rho(x, y, rho_space)
    g1 = fftma_field(grid, VariogramModel(model_x.kind, 1.0, model_x.range), rng.child("g1")).values
    g2 = fftma_field(grid, VariogramModel(model_y.kind, 1.0, model_y.range), rng.child("g2")).values
    z1 = g1
    z2 = rho * g1 + np.sqrt(1.0 - rho**2) * g2
    return (
        Field(rank_back_transform(z1, x.values), grid),
        Field(rank_back_transform(z2, y.values), grid),
    )


def average_spatial_covariance(grid: Grid2D, model_x: VariogramModel, model_y: VariogramModel) -> np.ndarray:
    pts = coordinates(grid)
    d = cdist(pts, pts)
    return 0.5 * (covariance(model_x, d) + covariance(model_y, d))


def joint_covariance(rho: float, spatial: np.ndarray) -> np.ndarray:
    """Variable-major Kronecker layout: rows 0..n-1 are X, n..2n-1 are Y."""
    R = np.array([[1.0, rho], [rho, 1.0]])
    return np.kron(R, spatial)


def factor_covariance(sigma: np.ndarray, retries: int = 3) -> np.ndarray:
    """Lower Cholesky factor, adding growing diagonal jitter if needed."""
    try:
        return scipy.linalg.cholesky(sigma, lower=True)
    except np.linalg.LinAlgError:
        pass
    jitter = 1e-8 * np.trace(sigma) / sigma.shape[0]
    eye = np.eye(sigma.shape[0])
    for _ in range(retries):
        try:
            return scipy.linalg.cholesky(sigma + jitter * eye, lower=True)
        except np.linalg.LinAlgError:
            jitter *= 10
    raise NumericError("joint covariance is not positive definite even with jitter")


def lu_joint_sim(
    x: Field,
    y: Field,
    grid: Grid2D,
    model_x: VariogramModel,
    model_y: VariogramModel,
    rng: Rng,
    rho_space: str = "scores",
    return_gaussian: bool = False,
):
    """Simulate both variables jointly from ``R kron S`` and rank-map them back.

    ``S`` is the mean of the two model covariances at the inter-point
    distances. With ``return_gaussian`` the Gaussian stage is returned as a
    third element ``(gx, gy)``.
    """
    _check_inputs(x, y, grid)
    n = grid.n
    if n > 2000:
        raise ParameterError(f"dense joint factorisation limited to n <= 2000, got {n}")
    rho = estimate_rho(x, y, rho_space)
    sigma = joint_covariance(rho, average_spatial_covariance(grid, model_x, model_y))
    L = factor_covariance(sigma)
    w = rng.standard_normal(2 * n)
    g = L @ w
    gx, gy = g[:n], g[n:]
    out = (
        Field(rank_back_transform(gx, x.values), grid),
        Field(rank_back_transform(gy, y.values), grid),
    )
    if return_gaussian:
        return out + ((gx, gy),)
    return out
