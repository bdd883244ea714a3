"""Exact convex-position primitives.

Hull membership, common points of many hulls, strict linear separation,
box hulls, and Tukey depth, all built on a guarded floating-point linear
feasibility solver.  Coordinates are rescaled to max |coord| = 1 before
solving so the feasibility tolerance TOL_FEAS has a uniform meaning;
every witness is re-verified by direct arithmetic, independent of the
solver.  Degenerate boundary contact (hulls touching at a face) counts
as intersecting; strictness lives only in the separator.

All operations are pure functions of their inputs and safe to call
concurrently.
"""

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import kernels
from .errors import DimensionMismatch, EmptyClassError, SolverFailure

TOL_FEAS = 1e-9
# the solver decides at a fraction of TOL_FEAS so that post-solve weight
# cleanup cannot push a re-verified witness past the published tolerance
_SOLVE_TOL = TOL_FEAS / 8.0


def _max_iter(rows: int, cols: int) -> int:
    return 200 + 25 * rows + 2 * cols


def as_point(q, dim: int | None = None) -> np.ndarray:
    q = np.asarray(q, dtype=np.float64).reshape(-1)
    if q.size == 0 or not np.all(np.isfinite(q)):
        raise ValueError("point must be a nonempty finite coordinate vector")
    if dim is not None and q.size != dim:
        raise DimensionMismatch(f"point has dim {q.size}, expected {dim}")
    return q


@dataclass(frozen=True, eq=False)
class PointSet:
    """Ordered finite point set; points is an (n, dim) float array."""

    dim: int
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != self.dim or self.dim < 1:
            raise DimensionMismatch(
                f"points must be (n, {self.dim}), got shape {pts.shape}"
            )
        if not np.all(np.isfinite(pts)):
            raise ValueError("coordinates must be finite")
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_rows(cls, rows) -> "PointSet":
        pts = np.atleast_2d(np.asarray(rows, dtype=np.float64))
        return cls(dim=pts.shape[1], points=pts)

    def __len__(self) -> int:
        return self.points.shape[0]

    def remove(self, indices) -> "PointSet":
        keep = np.ones(len(self), dtype=bool)
        keep[list(indices)] = False
        return PointSet(self.dim, self.points[keep])


@dataclass(frozen=True, eq=False)
class ColoredPartition:
    """A point set split into m nonempty color classes of equal dimension."""

    dim: int
    classes: tuple

    def __post_init__(self):
        classes = tuple(self.classes)
        if not classes:
            raise EmptyClassError("partition needs at least one class")
        for c in classes:
            if c.dim != self.dim:
                raise DimensionMismatch("all classes must share the partition dim")
            if len(c) == 0:
                raise EmptyClassError("empty class rejected")
        object.__setattr__(self, "classes", classes)

    @classmethod
    def from_class_rows(cls, class_rows) -> "ColoredPartition":
        sets = tuple(PointSet.from_rows(r) for r in class_rows)
        return cls(dim=sets[0].dim, classes=sets)

    @property
    def m(self) -> int:
        return len(self.classes)

    @property
    def total(self) -> int:
        return sum(len(c) for c in self.classes)

    def as_arrays(self):
        """Concatenated (points, offsets) view; class i owns offsets[i]:offsets[i+1]."""
        points = np.ascontiguousarray(
            np.concatenate([c.points for c in self.classes], axis=0)
        )
        sizes = [len(c) for c in self.classes]
        offsets = np.zeros(len(sizes) + 1, dtype=np.int64)
        np.cumsum(sizes, out=offsets[1:])
        return points, offsets


@dataclass(frozen=True, eq=False)
class HullWitness:
    """A common point with the per-class convex weights that certify it."""

    point: np.ndarray
    weights: tuple  # one nonnegative weight vector per class, each summing to 1


@dataclass(frozen=True, eq=False)
class SeparatingHyperplane:
    normal: np.ndarray
    offset: float
    strict: bool = True


def _scale_of(*arrays) -> float:
    s = max(float(np.max(np.abs(a))) if a.size else 0.0 for a in arrays)
    return s if s > 0.0 else 1.0


def hull_contains(ps: PointSet, q) -> tuple[bool, np.ndarray | None]:
    """Is q a convex combination of ps?  Returns (decision, witness weights)."""
    if len(ps) == 0:
        raise EmptyClassError("hull_contains needs a nonempty set")
    q = as_point(q, ps.dim)
    scale = _scale_of(ps.points, q)
    pts = np.ascontiguousarray(ps.points / scale)
    status, lam = kernels.hull_membership(
        pts, q / scale, _SOLVE_TOL, _max_iter(ps.dim + 1, len(ps))
    )
    if status == -1:
        raise SolverFailure("membership feasibility solve did not converge")
    if status == 0:
        return False, None
    lam = _clean_weights(lam)
    _check_combination(pts, lam, q / scale)
    return True, lam


def _clean_weights(lam: np.ndarray) -> np.ndarray:
    lam = np.clip(lam, 0.0, None)
    s = lam.sum()
    if s <= 0.0:
        raise SolverFailure("degenerate weight vector from solver")
    return lam / s


def _check_combination(pts_scaled, lam, target_scaled, tol=TOL_FEAS):
    err = float(np.max(np.abs(pts_scaled.T @ lam - target_scaled)))
    if err > tol:
        raise SolverFailure(f"witness re-verification failed (error {err:.3e})")


def hulls_common_point(p: ColoredPartition) -> HullWitness | None:
    """A point common to all class hulls, or None when the intersection is empty.

    Decided by a single linear feasibility program with a shared point
    variable eliminated through the first class's convex weights.
    """
    points, offsets = p.as_arrays()
    scale = _scale_of(points)
    pts = np.ascontiguousarray(points / scale)
    rows = p.dim * (p.m - 1) + p.m
    status, x, lam = kernels.hulls_common_feasibility(
        pts, offsets, _SOLVE_TOL, _max_iter(rows, p.total)
    )
    if status == -1:
        raise SolverFailure("hull-intersection feasibility solve did not converge")
    if status == 0:
        return None
    weights = []
    for i in range(p.m):
        w = _clean_weights(lam[offsets[i]:offsets[i + 1]])
        _check_combination(pts[offsets[i]:offsets[i + 1]], w, x)
        weights.append(w)
    return HullWitness(point=x * scale, weights=tuple(weights))


def verify_witness(p: ColoredPartition, w: HullWitness, tol: float = TOL_FEAS) -> bool:
    """Re-check a witness by direct arithmetic on normalized coordinates."""
    points, offsets = p.as_arrays()
    scale = _scale_of(points)
    x = w.point / scale
    for i, wi in enumerate(w.weights):
        if wi.min() < -tol or abs(wi.sum() - 1.0) > tol:
            return False
        combo = (p.classes[i].points / scale).T @ wi
        if np.max(np.abs(combo - x)) > tol:
            return False
    return True


def box_hulls_common_point(p: ColoredPartition) -> np.ndarray | None:
    """Point in the intersection of the classes' axis-parallel bounding boxes."""
    lo = np.max([c.points.min(axis=0) for c in p.classes], axis=0)
    hi = np.min([c.points.max(axis=0) for c in p.classes], axis=0)
    if np.any(lo > hi):
        return None
    return (lo + hi) / 2.0


def strictly_separable(a: PointSet, b: PointSet) -> SeparatingHyperplane | None:
    """A strict separator of conv(a) and conv(b), or None when the hulls meet.

    The decision is the exact logical negation of hulls_common_point on the
    two-class partition; the hyperplane itself comes from a max-margin LP and
    is re-checked by direct dot products before being returned.
    """
    if a.dim != b.dim:
        raise DimensionMismatch("separability needs equal dims")
    part = ColoredPartition(a.dim, (a, b))
    if hulls_common_point(part) is not None:
        return None
    hp = _max_margin_separator(a.points, b.points)
    if hp is None:
        raise SolverFailure("hulls are disjoint but no strict separator was certified")
    return hp


def _max_margin_separator(A: np.ndarray, B: np.ndarray) -> SeparatingHyperplane | None:
    from scipy.optimize import linprog

    d = A.shape[1]
    scale = _scale_of(A, B)
    As, Bs = A / scale, B / scale
    # variables (w, b, mu): maximize mu with w.a - b <= -mu, w.x - b >= mu, |w|_inf <= 1
    n_a, n_b = As.shape[0], Bs.shape[0]
    A_ub = np.zeros((n_a + n_b, d + 2))
    A_ub[:n_a, :d] = As
    A_ub[:n_a, d] = -1.0
    A_ub[:n_a, d + 1] = 1.0
    A_ub[n_a:, :d] = -Bs
    A_ub[n_a:, d] = 1.0
    A_ub[n_a:, d + 1] = 1.0
    b_ub = np.zeros(n_a + n_b)
    c = np.zeros(d + 2)
    c[d + 1] = -1.0
    bounds = [(-1.0, 1.0)] * d + [(-(d + 2.0), d + 2.0), (0.0, d + 2.0)]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if not res.success:
        return None
    w = res.x[:d]
    if res.x[d + 1] <= 1e-12 or np.max(np.abs(w)) <= 1e-12:
        return None
    return _finish_separator(w, As, Bs, scale)


def _finish_separator(w, As, Bs, scale) -> SeparatingHyperplane | None:
    pa = As @ w
    pb = Bs @ w
    if pa.max() >= pb.min():
        return None
    offset = (pa.max() + pb.min()) / 2.0
    # undo the coordinate scaling: w.(x/scale) < off  <=>  w.x < off*scale
    return SeparatingHyperplane(normal=w.copy(), offset=float(offset * scale))


def verify_separator(a: PointSet, b: PointSet, hp: SeparatingHyperplane) -> bool:
    return bool(
        np.all(a.points @ hp.normal < hp.offset)
        and np.all(b.points @ hp.normal > hp.offset)
    )


def tukey_depth(q, s: PointSet, method: str = "auto") -> int:
    """Exact closed-half-space depth of q in s.

    Dimension 1 uses interval logic and dimension 2 the exhaustive-direction
    sweep; higher dimensions enumerate candidate normals from (d-1)-subsets
    of points together with q (plus coordinate and point directions), which
    is exact under general position.
    """
    if len(s) == 0:
        raise EmptyClassError("tukey_depth needs a nonempty set")
    q = as_point(q, s.dim)
    if method not in ("auto", "sweep", "candidates"):
        raise ValueError(f"unknown method {method!r}")
    if method == "sweep" and s.dim > 2:
        raise DimensionMismatch("sweep method is exact only for d <= 2")
    if s.dim == 1:
        x = s.points[:, 0]
        tol = 1e-9 * _scale_of(s.points, q)
        return int(min(np.sum(x <= q[0] + tol), np.sum(x >= q[0] - tol)))
    if s.dim == 2 and method in ("auto", "sweep"):
        pts = s.points
        return int(kernels.tukey_depth_2d(
            np.ascontiguousarray(pts[:, 0]), np.ascontiguousarray(pts[:, 1]),
            float(q[0]), float(q[1]),
        ))
    return _tukey_depth_candidates(q, s)


def _tukey_depth_candidates(q: np.ndarray, s: PointSet) -> int:
    d = s.dim
    rel = s.points - q
    scale = _scale_of(rel)
    tol = 1e-9 * scale
    norms = np.linalg.norm(rel, axis=1)
    at_q = int(np.sum(norms <= tol))
    others = rel[norms > tol]
    n_o = others.shape[0]

    best = len(s)
    # closed counts at coordinate and point directions are valid upper bounds
    simple_dirs = [np.eye(d)[k] for k in range(d)] + [-np.eye(d)[k] for k in range(d)]
    simple_dirs += [r / np.linalg.norm(r) for r in others]
    simple_dirs += [-r / np.linalg.norm(r) for r in others]
    for u in simple_dirs:
        best = min(best, at_q + int(np.sum(others @ u <= tol)))

    # vertex directions: normals of hyperplanes through q and d-1 points;
    # strict counting realizes the adjacent-cell minimum (general position)
    if n_o >= d - 1:
        for idx in combinations(range(n_o), d - 1):
            M = others[list(idx)]
            _, _, vt = np.linalg.svd(M)
            u = vt[-1]  # null vector of the (d-1) x d subset matrix
            below = int(np.sum(others @ u < -tol))
            above = int(np.sum(others @ u > tol))
            best = min(best, at_q + below, at_q + above)
    return best
