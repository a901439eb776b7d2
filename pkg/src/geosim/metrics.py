"""Shape and variogram agreement between an original and a simulated pair."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, UndefinedMetricError
from .variogram import EmpiricalVariogram

RANGE_PAD = 1e-9


@dataclass(frozen=True, eq=False)
class Histogram2D:
    """Equal-width 2-D histogram; ``counts`` are raw, ``mass`` sums to one."""

    bins_x: int
    bins_y: int
    range_x: tuple[float, float]
    range_y: tuple[float, float]
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def mass(self) -> np.ndarray:
        return self.counts / self.total

    def same_geometry(self, other: "Histogram2D") -> bool:
        return (
            self.bins_x == other.bins_x
            and self.bins_y == other.bins_y
            and self.range_x == other.range_x
            and self.range_y == other.range_y
        )


@dataclass(frozen=True)
class MetricReport:
    shape_similarity: float
    r_gamma_x: float
    r_gamma_y: float
    sinkhorn_converged: bool = True


def _bin_index(v, lo, hi, bins):
    idx = np.floor((v - lo) / (hi - lo) * bins).astype(np.int64)
    # the upper edge belongs to the last bin
    return np.minimum(idx, bins - 1)


def histogram2d(xs, ys, bins: int = 20, range_x=None, range_y=None, bins_y: int | None = None) -> Histogram2D:
    xs = np.asarray(xs, dtype=float).ravel()
    ys = np.asarray(ys, dtype=float).ravel()
    if xs.size != ys.size or xs.size == 0:
        raise ParameterError("xs and ys must be nonempty and of equal length")
    bx = int(bins)
    by = int(bins_y if bins_y is not None else bins)
    if bx < 1 or by < 1:
        raise ParameterError("bin counts must be positive")
    range_x = tuple(map(float, range_x)) if range_x is not None else padded_range(xs)
    range_y = tuple(map(float, range_y)) if range_y is not None else padded_range(ys)
    for (lo, hi), v, name in ((range_x, xs, "x"), (range_y, ys, "y")):
        if not hi > lo:
            raise ParameterError(f"{name} range must have hi > lo")
        if v.min() < lo or v.max() > hi:
            raise ParameterError(f"{name} values fall outside the histogram range")
    ix = _bin_index(xs, *range_x, bx)
    iy = _bin_index(ys, *range_y, by)
    counts = np.zeros((bx, by), dtype=np.int64)
    np.add.at(counts, (ix, iy), 1)
    return Histogram2D(bx, by, range_x, range_y, counts)


def padded_range(*arrays) -> tuple[float, float]:
    """min/max over all arrays, widened by a tiny pad so edges are inside."""
    lo = min(float(np.min(a)) for a in arrays)
    hi = max(float(np.max(a)) for a in arrays)
    if hi == lo:
        hi = lo + 1.0
    return (lo - RANGE_PAD, hi + RANGE_PAD)


def shape_similarity(orig: Histogram2D, sim: Histogram2D) -> float:
    """Sum of elementwise minima of the two normalised histograms.

    Computed in integer arithmetic, so identical histograms give exactly 1.0.
    """
    if not orig.same_geometry(sim):
        raise ParameterError("histograms have different bin geometry")
    a, b = orig.counts, sim.counts
    na, nb = orig.total, sim.total
    overlap = int(np.minimum(a * nb, b * na).sum())
    return overlap / (na * nb)


def joint_shape_similarity(x0, y0, x1, y1, bins: int = 20) -> float:
    """Shape similarity using bins spanning the union of both samples."""
    rx = padded_range(x0, x1)
    ry = padded_range(y0, y1)
    h0 = histogram2d(x0, y0, bins, rx, ry)
    h1 = histogram2d(x1, y1, bins, rx, ry)
    return shape_similarity(h0, h1)


def variogram_correlation(orig: EmpiricalVariogram, sim: EmpiricalVariogram) -> float:
    """Pearson correlation of semivariances over the lags present in both."""
    common, io, is_ = np.intersect1d(orig.lag_centers, sim.lag_centers, return_indices=True)
    if common.size < 3:
        raise UndefinedMetricError(f"need at least 3 common lags, got {common.size}")
    a = np.asarray(orig.semivariances)[io]
    b = np.asarray(sim.semivariances)[is_]
    if np.ptp(a) == 0 or np.ptp(b) == 0:
        raise UndefinedMetricError("semivariance sequence has zero variance")
    r = float(np.corrcoef(a, b)[0, 1])
    if not math.isfinite(r):
        raise UndefinedMetricError("correlation is not finite")
    return max(-1.0, min(1.0, r))
