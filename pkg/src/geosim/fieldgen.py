"""Unconditional Gaussian fields by FFT moving average, and the five
bivariate relationship generators."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .grid import Grid2D
from .rng import Rng
from .variogram import VariogramModel, covariance


@dataclass(frozen=True, eq=False)
class Field:
    """Values on a grid, flattened row-major."""

    values: np.ndarray
    grid: Grid2D

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        if v.size != self.grid.n:
            raise ParameterError(f"field has {v.size} values but grid has {self.grid.n} points")
        if not np.all(np.isfinite(v)):
            raise ParameterError("field values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size

    def as_image(self) -> np.ndarray:
        return self.values.reshape(self.grid.shape)


class Relationship(enum.Enum):
    STEP = "step"
    GAUSSIAN_MIX = "gaussian_mix"
    SINUSOIDAL = "sinusoidal"
    STEP_RANDOM = "step_random"
    HETEROSCEDASTIC = "heteroscedastic"


@dataclass(frozen=True)
class RelationshipKind:
    kind: Relationship
    noise_scale: float = 0.1

    def __post_init__(self):
        if not isinstance(self.kind, Relationship):
            object.__setattr__(self, "kind", Relationship(self.kind))
        if not self.noise_scale >= 0:
            raise ParameterError(f"noise_scale must be >= 0, got {self.noise_scale}")


def spectral_amplitude(grid: Grid2D, model: VariogramModel) -> np.ndarray:
    """sqrt of the clipped spectrum of the covariance on the 2nx x 2ny torus."""
    my, mx = 2 * grid.ny, 2 * grid.nx
    iy = np.arange(my)
    ix = np.arange(mx)
    dy = np.minimum(iy, my - iy)[:, None]
    dx = np.minimum(ix, mx - ix)[None, :]
    h = np.hypot(dx, dy) * grid.spacing
    spectrum = np.fft.fft2(covariance(model, h)).real
    return np.sqrt(np.clip(spectrum, 0.0, None))


def fftma_field(grid: Grid2D, model: VariogramModel, rng: Rng) -> Field:
    """Zero-mean Gaussian field with approximately the model covariance.

    The cropped field is standardised to mean 0 and (population) variance
    equal to the model sill.
    """
    amp = spectral_amplitude(grid, model)
    noise = rng.standard_normal(amp.shape)
    z = np.fft.ifft2(amp * np.fft.fft2(noise)).real
    z = z[: grid.ny, : grid.nx].ravel()
    z = (z - z.mean()) / z.std() * np.sqrt(model.sill)
    return Field(z, grid)


def _pm_sign(a):
    # zero maps to +1 so the result is always one of two branches
    return np.where(a >= 0, 1.0, -1.0)


def make_relationship(x: Field, y_raw: Field, kind: RelationshipKind, rng: Rng) -> Field:
    """Build Y from X pointwise.

    ``y_raw`` is a standardised field that supplies the additive noise
    (``noise_scale * y_raw``) and, for the Gaussian mixture, the branch signs.
    Random branching draws its signs from ``rng``.
    """
    if x.grid != y_raw.grid:
        raise ParameterError("x and y_raw must share a grid")
    xv, yr = x.values, y_raw.values
    eps = kind.noise_scale * yr
    k = kind.kind
    if k is Relationship.STEP:
        y = 0.8 * _pm_sign(xv) + eps
    elif k is Relationship.GAUSSIAN_MIX:
        y = _pm_sign(yr) * xv + eps
    elif k is Relationship.SINUSOIDAL:
        y = np.sin(2 * np.pi * xv) + eps
    elif k is Relationship.STEP_RANDOM:
        y = rng.signs(xv.size) * xv
    elif k is Relationship.HETEROSCEDASTIC:
        y = xv + np.abs(xv) * eps
    else:  # pragma: no cover
        raise ParameterError(f"unknown relationship {k}")
    return Field(y, x.grid)


def generate_pair(
    grid: Grid2D,
    model_x: VariogramModel,
    model_y: VariogramModel,
    kind: RelationshipKind,
    rng: Rng,
) -> tuple[Field, Field]:
    x = fftma_field(grid, model_x, rng.child("x"))
    y_raw = fftma_field(grid, model_y, rng.child("y_raw"))
    y = make_relationship(x, y_raw, kind, rng.child("branch"))
    return x, y
