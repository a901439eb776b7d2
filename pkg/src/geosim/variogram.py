"""Spherical and exponential variogram models and the omnidirectional
experimental variogram."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist

from .errors import ParameterError
from .grid import Grid2D, coordinates


class VariogramKind(enum.Enum):
    SPHERICAL = "spherical"
    EXPONENTIAL = "exponential"


@dataclass(frozen=True)
class VariogramModel:
    kind: VariogramKind
    sill: float
    range: float

    def __post_init__(self):
        if not isinstance(self.kind, VariogramKind):
            object.__setattr__(self, "kind", VariogramKind(self.kind))
        if not self.sill > 0:
            raise ParameterError(f"sill must be positive, got {self.sill}")
        if not self.range > 0:
            raise ParameterError(f"range must be positive, got {self.range}")

    @classmethod
    def spherical(cls, sill=1.0, range=1.0):
        return cls(VariogramKind.SPHERICAL, float(sill), float(range))

    @classmethod
    def exponential(cls, sill=1.0, range=1.0):
        return cls(VariogramKind.EXPONENTIAL, float(sill), float(range))


def evaluate(model: VariogramModel, h):
    """Semivariance at lag ``h`` (scalar or array)."""
    h_arr = np.asarray(h, dtype=float)
    if np.any(h_arr < 0):
        raise ParameterError("lag distance must be nonnegative")
    c0, a = model.sill, model.range
    if model.kind is VariogramKind.SPHERICAL:
        r = np.minimum(h_arr / a, 1.0)
        g = c0 * (1.5 * r - 0.5 * r**3)
    else:
        g = c0 * (1.0 - np.exp(-3.0 * h_arr / a))
    return float(g) if g.ndim == 0 else g


def covariance(model: VariogramModel, h):
    """Covariance ``sill - gamma(h)``."""
    g = evaluate(model, h)
    return model.sill - g


@dataclass(frozen=True)
class EmpiricalVariogram:
    lag_centers: np.ndarray
    semivariances: np.ndarray
    pair_counts: np.ndarray

    def __len__(self):
        return len(self.lag_centers)


def lag_edges(n_lags: int, max_lag: float) -> np.ndarray:
    """Upper bin edges ``w, 2w, ..., max_lag`` with ``w = max_lag / n_lags``."""
    edges = np.arange(1, n_lags + 1) * (max_lag / n_lags)
    edges[-1] = max_lag
    return edges


def empirical_variogram(values, grid: Grid2D, n_lags: int = 15, max_lag: float = 18.0) -> EmpiricalVariogram:
    """Classical (Matheron) estimator over equal-width lag bins.

    Bin ``m`` collects unordered pairs with separation in ``((m-1)w, mw]``.
    Empty bins are dropped.
    """
    z = np.asarray(getattr(values, "values", values), dtype=float).ravel()
    if z.size != grid.n:
        raise ParameterError(f"field has {z.size} values but grid has {grid.n} points")
    if n_lags < 2:
        raise ParameterError("n_lags must be >= 2")
    if not max_lag > 0:
        raise ParameterError("max_lag must be positive")
    return point_variogram(coordinates(grid), z, n_lags, max_lag)


def point_variogram(coords, values, n_lags: int, max_lag: float) -> EmpiricalVariogram:
    """Same estimator for arbitrary point sets; allows a single bin."""
    coords = np.asarray(coords, dtype=float)
    z = np.asarray(values, dtype=float).ravel()
    if len(coords) != z.size:
        raise ParameterError("coords and values differ in length")
    if n_lags < 1 or not max_lag > 0:
        raise ParameterError("need n_lags >= 1 and max_lag > 0")
    d = pdist(coords)
    sq = 0.5 * pdist(z[:, None], "sqeuclidean")
    keep = (d > 0) & (d <= max_lag)
    d, sq = d[keep], sq[keep]

    edges = lag_edges(n_lags, max_lag)
    # first edge >= d gives the half-open bin ((m-1)w, mw]
    bins = np.searchsorted(edges, d, side="left")
    counts = np.bincount(bins, minlength=n_lags)
    sums = np.bincount(bins, weights=sq, minlength=n_lags)

    w = max_lag / n_lags
    centers = (np.arange(n_lags) + 0.5) * w
    nonempty = counts > 0
    return EmpiricalVariogram(
        lag_centers=centers[nonempty],
        semivariances=sums[nonempty] / counts[nonempty],
        pair_counts=counts[nonempty],
    )
