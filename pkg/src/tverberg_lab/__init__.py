"""Stochastic convex-position laboratory.

Exact convex-position primitives, closed-form partition-probability bounds,
reproducible sampling of random colored point sets, separability condition
numbers, seeded Monte Carlo experiment harnesses, and randomized approximate
centerpoints.  See the README for the CLI and the acceptance suite.
"""

__version__ = "0.1.0"

from .backends import active_backend
from .errors import DimensionMismatch, EmptyClassError, GuardRefused, SolverFailure
from .geometry import (
    ColoredPartition,
    HullWitness,
    PointSet,
    SeparatingHyperplane,
    box_hulls_common_point,
    hull_contains,
    hulls_common_point,
    strictly_separable,
    tukey_depth,
)
from .sampling import (
    AllocationSample,
    BalancedDistribution,
    ModelSpec,
    sample_allocation,
    sample_equipartition,
    sphere_projection,
)

__all__ = [
    "__version__",
    "active_backend",
    "DimensionMismatch",
    "EmptyClassError",
    "GuardRefused",
    "SolverFailure",
    "ColoredPartition",
    "HullWitness",
    "PointSet",
    "SeparatingHyperplane",
    "box_hulls_common_point",
    "hull_contains",
    "hulls_common_point",
    "strictly_separable",
    "tukey_depth",
    "AllocationSample",
    "BalancedDistribution",
    "ModelSpec",
    "sample_allocation",
    "sample_equipartition",
    "sphere_projection",
]
