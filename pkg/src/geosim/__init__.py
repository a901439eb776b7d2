"""Multivariate geostatistical simulation by relational Sinkhorn matching,
with Gaussian copula and joint-covariance baselines."""

from .errors import NumericError, ParameterError, UndefinedMetricError
from .fieldgen import Field, Relationship, RelationshipKind, fftma_field, generate_pair, make_relationship
from .grid import AdjacencyGraph, Grid2D, coordinates, knn_adjacency
from .rng import Rng
from .transport import (
    CouplingMatrix,
    SinkhornParams,
    greedy_round,
    mst_direct,
    mst_direct_detailed,
    relational_match,
    sinkhorn_normalize,
)
from .variogram import VariogramKind, VariogramModel, covariance, empirical_variogram, evaluate

__all__ = [
    "AdjacencyGraph", "CouplingMatrix", "Field", "Grid2D", "NumericError", "ParameterError",
    "Relationship", "RelationshipKind", "Rng", "SinkhornParams", "UndefinedMetricError",
    "VariogramKind", "VariogramModel", "coordinates", "covariance", "empirical_variogram",
    "evaluate", "fftma_field", "generate_pair", "greedy_round", "knn_adjacency",
    "make_relationship", "mst_direct", "mst_direct_detailed", "relational_match",
    "sinkhorn_normalize",
]
