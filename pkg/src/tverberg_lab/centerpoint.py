"""Approximate centerpoints from random Tverberg partitions.

A point common to all m class hulls of a partition of s has half-space depth
at least m in s (each closed half-space through it meets every class), so a
successful random partition certifies depth m.  Both searches retry with
fresh sub-seeded randomness and report the attempts consumed; the paper's
underlying algorithms have no failure handling, an added practicality since
only asymptotic success is guaranteed.
"""

import math
from dataclasses import dataclass

import numpy as np

from .geometry import ColoredPartition, PointSet, hulls_common_point, tukey_depth
from .montecarlo import _mix64

MEASURED_DEPTH_DIM_LIMIT = 4


@dataclass(frozen=True, eq=False)
class CenterpointResult:
    point: np.ndarray
    certified_depth: int  # = m, from hull membership in every class
    measured_depth: int | None  # exact Tukey depth when the dimension allows
    attempts: int
    method: str  # equipartition | allocation


def _result(s: PointSet, witness, m: int, attempts: int, method: str) -> CenterpointResult:
    measured = None
    if s.dim <= MEASURED_DEPTH_DIM_LIMIT:
        measured = tukey_depth(witness.point, s)
    return CenterpointResult(point=witness.point, certified_depth=m,
                             measured_depth=measured, attempts=attempts,
                             method=method)


def centerpoint_equipartition(s: PointSet, m: int, retries: int,
                              seed: int = 0) -> CenterpointResult | None:
    """Random equi-partition search: shuffled round-robin classes of size
    floor(n/m) or ceil(n/m), retried with fresh sub-seeds."""
    n = len(s)
    if m < 1 or n < m:
        raise ValueError("need 1 <= m <= |s|")
    for attempt in range(1, max(1, retries) + 1):
        rng = np.random.default_rng(_mix64(seed, attempt))
        perm = rng.permutation(n)
        classes = tuple(
            PointSet(s.dim, s.points[perm[c::m]]) for c in range(m))
        witness = hulls_common_point(ColoredPartition(s.dim, classes))
        if witness is not None:
            return _result(s, witness, m, attempt, "equipartition")
    return None


def centerpoint_allocation(s: PointSet, m: int, retries: int,
                           seed: int = 0) -> CenterpointResult | None:
    """Uniform random coloring search; empty colors force a retry."""
    n = len(s)
    if m < 1 or n < m:
        raise ValueError("need 1 <= m <= |s|")
    for attempt in range(1, max(1, retries) + 1):
        rng = np.random.default_rng(_mix64(seed, attempt))
        colors = rng.integers(0, m, n)
        if np.bincount(colors, minlength=m).min() == 0:
            continue
        classes = tuple(
            PointSet(s.dim, s.points[colors == c]) for c in range(m))
        witness = hulls_common_point(ColoredPartition(s.dim, classes))
        if witness is not None:
            return _result(s, witness, m, attempt, "allocation")
    return None


def suggest_colors(n_points: int, d: int, epsilon0: float = 0.5) -> int:
    """Largest m whose classes keep ceil((1+eps0) log2 m) points each.

    The slack eps0 trades success probability against certified depth; the
    asymptotic threshold only fixes the log2 m scale, not the constant.
    """
    if n_points < 2:
        raise ValueError("need at least 2 points")
    if epsilon0 < 0:
        raise ValueError("epsilon0 must be >= 0")
    best = 1
    for m in range(2, n_points + 1):
        if n_points // m >= math.ceil((1.0 + epsilon0) * math.log2(m)):
            best = m
    return best
