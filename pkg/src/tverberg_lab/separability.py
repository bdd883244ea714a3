"""Tolerance, minimum removals to separability, PertSEP*0, and DegNSEP*.

Separability throughout means strict affine separability.  Points exactly on
a candidate hyperplane are counted as classifiable to either side (an
infinitesimal perturbation of the plane realizes any sign assignment of
affinely independent on-plane points); in dimension 1 coincident on-threshold
points are handled exactly, since a perturbed threshold moves the whole
cluster to one common side.

Exponential enumerations carry complexity guards with an explicit override.
"""

import csv
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import kernels
from .errors import DimensionMismatch, EmptyClassError, GuardRefused
from .geometry import ColoredPartition, PointSet, as_point, hull_contains

TOLERANCE_GUARD_POINTS = 24
TOLERANCE_GUARD_TMAX = 3
EXACT_DIM_LIMIT = 4
_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Points with labels 1..m (contiguous, mapped by first appearance)."""

    dim: int
    X: np.ndarray
    y: np.ndarray
    label_names: tuple = ()

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.int64)
        if X.ndim != 2 or X.shape[1] != self.dim:
            raise DimensionMismatch(f"X must be (n, {self.dim})")
        if y.shape != (X.shape[0],):
            raise ValueError("y must have one label per row")
        if X.shape[0] and (y.min() < 1 or not np.array_equal(
                np.unique(y), np.arange(1, y.max() + 1))):
            raise ValueError("labels must cover a contiguous range 1..m")
        names = tuple(self.label_names) or tuple(
            str(c) for c in range(1, (int(y.max()) if y.size else 0) + 1))
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "label_names", names)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def m(self) -> int:
        return int(self.y.max()) if self.n else 0

    def class_points(self, label: int) -> np.ndarray:
        return self.X[self.y == label]

    def pair_subset(self, a: int, b: int) -> "LabeledDataset":
        """Two-label restriction; a maps to 1, b to 2."""
        mask = (self.y == a) | (self.y == b)
        y = np.where(self.y[mask] == a, 1, 2)
        return LabeledDataset(self.dim, self.X[mask], y,
                              (self.label_names[a - 1], self.label_names[b - 1]))

    def to_partition(self) -> ColoredPartition:
        classes = []
        for label in range(1, self.m + 1):
            pts = self.class_points(label)
            if pts.shape[0] == 0:
                raise EmptyClassError(f"label {label} has no points")
            classes.append(PointSet(self.dim, pts))
        return ColoredPartition(self.dim, tuple(classes))

    @classmethod
    def from_label_values(cls, X, labels) -> "LabeledDataset":
        order: dict = {}
        y = []
        for v in labels:
            key = str(v)
            if key not in order:
                order[key] = len(order) + 1
            y.append(order[key])
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return cls(X.shape[1], X, np.asarray(y), tuple(order))


def read_dataset_csv(path) -> LabeledDataset:
    """CSV with header x1..xd,label (RFC-4180, decimal point only)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError("empty CSV: header row x1..xd,label required")
        header = [h.strip() for h in header]
        if len(header) < 2 or header[-1] != "label" or \
                header[:-1] != [f"x{i+1}" for i in range(len(header) - 1)]:
            raise ValueError(f"line 1: expected header x1..xd,label, got {header}")
        d = len(header) - 1
        rows, labels = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != d + 1:
                raise ValueError(f"line {lineno}: expected {d+1} fields, got {len(row)}")
            try:
                rows.append([float(v) for v in row[:d]])
            except ValueError:
                raise ValueError(f"line {lineno}: non-numeric coordinate in {row[:d]}")
            labels.append(row[d])
    if not rows:
        raise ValueError("CSV has a header but no data rows")
    return LabeledDataset.from_label_values(np.asarray(rows), labels)


def write_dataset_csv(ds: LabeledDataset, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{i+1}" for i in range(ds.dim)] + ["label"])
        for row, label in zip(ds.X, ds.y):
            writer.writerow([repr(float(v)) for v in row] + [ds.label_names[label - 1]])


@dataclass(frozen=True)
class ToleranceResult:
    """Largest t (capped) such that every removal of <= t points leaves the
    class hulls with a common point.

    breaking_set holds t+1 global point indices whose removal empties the
    intersection (the certificate of maximality); it is None when the search
    stopped at the cap.  tolerance is -1 when the hulls already fail to
    intersect with nothing removed; break_count = tolerance + 1 is then the
    size of the minimal breaking set in all cases.
    """

    tolerance: int
    breaking_set: tuple | None
    at_cap: bool
    t_max: int

    @property
    def break_count(self) -> int:
        return self.tolerance + 1


def _survives(points, offsets, keep_mask) -> bool:
    """Do the class hulls still share a point after masking out removals?"""
    m = offsets.shape[0] - 1
    kept_parts = []
    sizes = []
    for i in range(m):
        part = points[offsets[i]:offsets[i + 1]][keep_mask[offsets[i]:offsets[i + 1]]]
        if part.shape[0] == 0:
            return False
        kept_parts.append(part)
        sizes.append(part.shape[0])
    sub = np.ascontiguousarray(np.vstack(kept_parts))
    sub_off = np.zeros(m + 1, dtype=np.int64)
    np.cumsum(sizes, out=sub_off[1:])
    d = points.shape[1]
    rows = d * (m - 1) + m
    status, _, _ = kernels.hulls_common_feasibility(
        sub, sub_off, _TOL / 8.0, 200 + 25 * rows + 2 * sub.shape[0])
    if status == -1:
        from .errors import SolverFailure

        raise SolverFailure("feasibility solve failed during tolerance scan")
    return status == 1


def tolerance_exact(p: ColoredPartition, t_max: int, override: bool = False) -> ToleranceResult:
    """Exhaustive-removal tolerance of the partition, capped at t_max.

    Checks removal subsets of size 0..t_max+1 in increasing size; the first
    breaking subset pins the tolerance exactly (surviving all size-s removals
    implies surviving all smaller ones, by hull monotonicity).
    """
    if t_max < 0:
        raise ValueError("t_max must be >= 0")
    total = p.total
    if total > TOLERANCE_GUARD_POINTS and t_max > TOLERANCE_GUARD_TMAX and not override:
        raise GuardRefused(
            f"tolerance_exact on {total} points with t_max={t_max} exceeds the "
            f"complexity guard ({TOLERANCE_GUARD_POINTS} points or t_max <= "
            f"{TOLERANCE_GUARD_TMAX}); pass override=True to run anyway")
    points, offsets = p.as_arrays()
    scale = float(np.max(np.abs(points)))
    pts = np.ascontiguousarray(points / (scale if scale > 0 else 1.0))
    keep = np.ones(total, dtype=bool)
    for size in range(0, min(t_max + 1, total) + 1):
        for subset in combinations(range(total), size):
            keep[:] = True
            keep[list(subset)] = False
            if not _survives(pts, offsets, keep):
                return ToleranceResult(tolerance=size - 1,
                                       breaking_set=tuple(subset),
                                       at_cap=False, t_max=t_max)
    return ToleranceResult(tolerance=t_max, breaking_set=None, at_cap=True, t_max=t_max)


def _binary_signs(ds: LabeledDataset) -> np.ndarray:
    if ds.m != 2:
        raise ValueError("operation needs exactly 2 labels")
    return np.where(ds.y == 1, 1.0, -1.0)


def min_removals_to_separable(
    ds: LabeledDataset, override: bool = False
) -> tuple[int, tuple]:
    """Exact minimum number of points to remove for strict separability.

    Enumerates hyperplanes through d affinely independent points (lifted
    homogeneous coordinates padded with coordinate directions so degenerate
    and tiny inputs still get candidates), both orientations, counting
    strictly misclassified points; on-plane points ride free.  Exact under
    general position; d=1 is specialized with exact coincident handling.
    """
    if ds.m != 2:
        raise ValueError("min_removals_to_separable needs exactly 2 labels")
    if ds.n < 2:
        return 0, ()
    if np.all(np.ptp(ds.X, axis=0) == 0) and ds.m == 2:
        # all points identical: keep the majority label
        minority = min(int(np.sum(ds.y == 1)), int(np.sum(ds.y == 2)))
        idx = np.flatnonzero(ds.y == (1 if np.sum(ds.y == 1) <= np.sum(ds.y == 2) else 2))
        return minority, tuple(int(i) for i in idx)
    if ds.dim > EXACT_DIM_LIMIT and not override:
        raise GuardRefused(
            f"exact hyperplane enumeration is O(n^(d+1)); d={ds.dim} exceeds "
            f"{EXACT_DIM_LIMIT} (pass override=True to run anyway)")
    if ds.dim == 1:
        return _min_removals_1d(ds)
    return _min_removals_scan(ds)


def _min_removals_1d(ds: LabeledDataset) -> tuple[int, tuple]:
    x = ds.X[:, 0]
    s = _binary_signs(ds)  # +1 for label 1, -1 for label 2
    best = None
    for xt in np.unique(x):
        on = x == xt
        left, right = x < xt, x > xt
        for orient in (1.0, -1.0):
            # orient=+1: sign +1 belongs left, -1 right
            wrong = (left & (s != orient)) | (right & (s == orient))
            for push_left in (True, False):
                cluster_wrong = on & ((s != orient) if push_left else (s == orient))
                total = wrong | cluster_wrong
                cnt = int(total.sum())
                if best is None or cnt < best[0]:
                    best = (cnt, tuple(int(i) for i in np.flatnonzero(total)))
    return best


def _min_removals_scan(ds: LabeledDataset) -> tuple[int, tuple]:
    d = ds.dim
    scale = float(np.max(np.abs(ds.X)))
    Xs = ds.X / (scale if scale > 0 else 1.0)
    s = _binary_signs(ds)
    lifted = np.hstack([Xs, np.ones((ds.n, 1))])
    synth = np.hstack([np.eye(d), np.zeros((d, 1))])
    rows = np.vstack([lifted, synth])
    best_cnt, best_set = None, None
    for idx in combinations(range(rows.shape[0]), d):
        M = rows[list(idx)]
        _, _, vt = np.linalg.svd(M)
        v = vt[-1]
        w, b = v[:d], v[d]
        if np.max(np.abs(w)) <= 1e-12:
            continue
        h = Xs @ w + b
        strict_pos, strict_neg = h > _TOL, h < -_TOL
        wrong_a = int(np.sum((s > 0) & strict_neg) + np.sum((s < 0) & strict_pos))
        wrong_b = int(np.sum((s > 0) & strict_pos) + np.sum((s < 0) & strict_neg))
        cnt, pos_side = (wrong_a, True) if wrong_a <= wrong_b else (wrong_b, False)
        if best_cnt is None or cnt < best_cnt:
            if pos_side:
                mask = ((s > 0) & strict_neg) | ((s < 0) & strict_pos)
            else:
                mask = ((s > 0) & strict_pos) | ((s < 0) & strict_neg)
            best_cnt, best_set = cnt, tuple(int(i) for i in np.flatnonzero(mask))
            if best_cnt == 0:
                break
    return best_cnt, best_set


@dataclass(frozen=True)
class CondNumberReport:
    """PertSEP*0 and companions for a two-label dataset.

    pertsep0 = min_removals / n.  tolerance is the Definition-2.1 tolerance of
    the induced two-class partition when the complexity guard allows computing
    it; the certified identity is min_removals == tolerance + 1 (the printed
    equality carries a one-unit offset, see ToleranceResult.break_count).
    """

    pertsep0: float
    min_removals: int
    n: int
    removal_set: tuple
    tolerance: int | None = None
    degnsep: float | None = None


def pertsep0(ds: LabeledDataset, override: bool = False) -> CondNumberReport:
    removals, removal_set = min_removals_to_separable(ds, override=override)
    if removals > ds.n // 2:
        raise RuntimeError(
            f"min_removals {removals} exceeds floor(n/2); enumeration bug")
    tol = None
    part = ds.to_partition()
    # cross-check stays cheap: subset enumeration up to size removals+1
    if ds.n <= 14 or removals <= TOLERANCE_GUARD_TMAX:
        res = tolerance_exact(part, t_max=max(removals, 1), override=override)
        tol = res.tolerance
        if res.break_count != removals:
            raise RuntimeError(
                f"tolerance/min-removals identity failed: break_count="
                f"{res.break_count}, min_removals={removals}")
    deg = degnsep_exact_low_dim(ds) if ds.dim <= 2 else None
    return CondNumberReport(pertsep0=removals / ds.n, min_removals=removals,
                            n=ds.n, removal_set=removal_set, tolerance=tol,
                            degnsep=deg)


def degnsep_exact_low_dim(ds: LabeledDataset) -> float:
    """Exact min over unit beta of the average negative margin (d <= 2).

    Homogeneous model (no intercept), Euclidean normalization.  d=1 checks
    beta = +-1; d=2 sweeps the unit circle over the 2n sign-change angles of
    beta.x_i plus each arc's unconstrained minimizer direction.
    """
    s = _binary_signs(ds)
    z = ds.X * s[:, None]  # margins are beta . z_i
    if ds.dim == 1:
        col = z[:, 0]
        return float(min(np.mean(np.maximum(-col, 0.0)),
                         np.mean(np.maximum(col, 0.0))))
    if ds.dim != 2:
        raise DimensionMismatch("exact DegNSEP* implemented for d in {1, 2}; "
                                "use degnsep_sampled for higher dimensions")

    def objective(theta):
        beta = np.array([np.cos(theta), np.sin(theta)])
        return float(np.mean(np.maximum(-(z @ beta), 0.0)))

    zeros = []
    for a, b in z:
        t0 = np.arctan2(-a, b) if (a != 0.0 or b != 0.0) else 0.0
        zeros.extend(((t0) % (2 * np.pi), (t0 + np.pi) % (2 * np.pi)))
    angles = np.sort(np.asarray(zeros))
    cands = list(angles)
    k = len(angles)
    for i in range(k):
        lo = angles[i]
        hi = angles[(i + 1) % k] + (2 * np.pi if i + 1 == k else 0.0)
        mid = 0.5 * (lo + hi)
        cands.append(mid)
        beta_mid = np.array([np.cos(mid), np.sin(mid)])
        active = (z @ beta_mid) < 0.0
        v = z[active].sum(axis=0)
        if np.hypot(*v) > 0.0:
            t_star = np.arctan2(v[1], v[0])
            for t in (t_star % (2 * np.pi), t_star % (2 * np.pi) + 2 * np.pi):
                if lo <= t <= hi:
                    cands.append(t)
    return min(objective(t) for t in cands)


def degnsep_sampled(ds: LabeledDataset, directions: int, seed: int = 0) -> float:
    """Upper bound on DegNSEP*: min of the objective over sampled directions.

    d=2 uses equally spaced angles with a seeded uniform offset (each angle
    marginally uniform, spacing 2*pi/directions); higher dimensions use
    normalized gaussian directions.
    """
    if directions < 1:
        raise ValueError("directions must be >= 1")
    s = _binary_signs(ds)
    z = ds.X * s[:, None]
    rng = np.random.default_rng(seed)
    if ds.dim == 2:
        thetas = 2 * np.pi * (np.arange(directions) + rng.random()) / directions
        dirs = np.c_[np.cos(thetas), np.sin(thetas)]
    else:
        g = rng.standard_normal((directions, ds.dim))
        dirs = g / np.maximum(np.linalg.norm(g, axis=1, keepdims=True), 1e-300)
    margins = z @ dirs.T
    return float(np.mean(np.maximum(-margins, 0.0), axis=0).min())


def weakly_separable_through_origin(ds: LabeledDataset) -> bool:
    """LP check: does some nonzero beta give every point a nonnegative margin?"""
    from scipy.optimize import linprog

    s = _binary_signs(ds)
    z = ds.X * s[:, None]
    d = ds.dim
    for j in range(d):
        for sign in (1.0, -1.0):
            A_eq = np.zeros((1, d))
            A_eq[0, j] = 1.0
            res = linprog(np.zeros(d), A_ub=-z, b_ub=np.zeros(ds.n),
                          A_eq=A_eq, b_eq=[sign],
                          bounds=[(None, None)] * d, method="highs")
            if res.success:
                return True
    return False


def tolerance_certificate_grouped(
    p: ColoredPartition, candidate, mode: str = "origin"
) -> int | None:
    """Certified lower bound on tolerance from the group-splitting argument.

    mode="origin": each class is split into floor(n_i/2d) groups of size
    >= 2d; if every class has candidate-containing groups, removing t points
    kills at most t groups, so min_i (containing groups) - 1 is a certified
    tolerance.  mode="radon" (two classes): the union is split into groups of
    size >= 2d+2 and a group succeeds when its two color restrictions have
    intersecting hulls; successes - 1 is certified the same way.
    Returns None when no certificate is available.
    """
    q = as_point(candidate, p.dim)
    d = p.dim
    if mode == "origin":
        cert = None
        for cls in p.classes:
            n_groups = len(cls) // (2 * d)
            if n_groups == 0:
                return None
            count = 0
            for g in range(n_groups):
                sizes = _group_bounds(len(cls), n_groups)
                lo, hi = sizes[g]
                if hull_contains(PointSet(d, cls.points[lo:hi]), q)[0]:
                    count += 1
            if count == 0:
                return None
            cert = count if cert is None else min(cert, count)
        return cert - 1
    if mode == "radon":
        if p.m != 2:
            raise ValueError("radon-mode certificate needs exactly 2 classes")
        points, offsets = p.as_arrays()
        labels = np.repeat(np.arange(2), np.diff(offsets))
        total = points.shape[0]
        n_groups = total // (2 * d + 2)
        if n_groups == 0:
            return None
        successes = 0
        for lo, hi in _group_bounds(total, n_groups):
            ga = points[lo:hi][labels[lo:hi] == 0]
            gb = points[lo:hi][labels[lo:hi] == 1]
            if ga.shape[0] == 0 or gb.shape[0] == 0:
                continue
            part = ColoredPartition(d, (PointSet(d, ga), PointSet(d, gb)))
            from .geometry import hulls_common_point

            if hulls_common_point(part) is not None:
                successes += 1
        return successes - 1 if successes else None
    raise ValueError(f"unknown certificate mode {mode!r}")


def _group_bounds(n: int, groups: int) -> list:
    base, extra = divmod(n, groups)
    bounds, lo = [], 0
    for g in range(groups):
        hi = lo + base + (1 if g < extra else 0)
        bounds.append((lo, hi))
        lo = hi
    return bounds
