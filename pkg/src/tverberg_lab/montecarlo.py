"""Seeded Monte Carlo estimation of the partition-event probabilities.

Trial t of an estimate owns the point-index range [t*ppt, (t+1)*ppt) of the
counter-based sample stream, so results are bit-identical regardless of how
trials are chunked across workers.  Allocation trials with an empty color
count the event as false and are tallied separately.

Event decisions are exact: the hull-intersection LP is preceded by two exact
shortcuts (some class pair with disjoint bounding boxes => false; in the
plane, center inside every class hull => true) that only matter for the
large-m threshold sweeps.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields

import numpy as np

from . import kernels
from .errors import GuardRefused, SolverFailure
from .formulas import (
    tverberg_equipartition_lower,
    tverberg_equipartition_upper,
)
from .sampling import BalancedDistribution, ModelSpec, sample_colors, sample_points
from .separability import TOLERANCE_GUARD_POINTS, TOLERANCE_GUARD_TMAX

_WILSON_Z = 1.959963984540054  # 95%
_SOLVE_TOL = 1e-9 / 8.0
_CHUNK = 65536

EVENTS = ("tverberg", "tverberg_tolerance", "radon", "radon_tolerance",
          "box_tverberg", "pairwise_mle", "hemisphere")


def _mix64(a: int, b: int) -> int:
    """splitmix64 of (a xor golden*b); derives independent sub-seeds."""
    mask = (1 << 64) - 1
    z = (a ^ (b * 0x9E3779B97F4A7C15)) & mask
    z = (z + 0x9E3779B97F4A7C15) & mask
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
    return (z ^ (z >> 31)) & mask


def wilson_interval(successes: int, trials: int) -> tuple[float, float]:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    z2 = _WILSON_Z**2
    p = successes / trials
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2.0 * trials)) / denom
    half = _WILSON_Z * math.sqrt(p * (1.0 - p) / trials + z2 / (4.0 * trials**2)) / denom
    # same-sign roundoff can push the bracket past the point estimate
    return max(0.0, min(center - half, p)), min(1.0, max(center + half, p))


@dataclass(frozen=True)
class TrialEstimate:
    successes: int
    trials: int
    estimate: float
    ci_low: float
    ci_high: float
    seed: int
    event_id: str
    empty_class_trials: int = 0

    @property
    def half_width(self) -> float:
        return (self.ci_high - self.ci_low) / 2.0


@dataclass(frozen=True)
class SweepRow:
    """One grid cell of an experiment, CSV-ready."""

    event_id: str
    m: int
    d: int
    successes: int
    trials: int
    estimate: float
    ci_low: float
    ci_high: float
    seed: int
    n: int | None = None
    k: int | None = None
    t: int | None = None
    c: float | None = None
    lower_bound: float | None = None
    upper_bound: float | None = None
    violation: bool | None = None
    empty_class_trials: int = 0


@dataclass(frozen=True)
class PertsepRow:
    m: int
    d: int
    k: int
    trials: int
    mean_min_pertsep0: float
    p05_min_pertsep0: float
    seed: int
    empty_class_trials: int = 0


def rows_to_csv(rows, fh, row_type=None) -> None:
    """RFC-4180 CSV with a header row; None becomes the empty field.

    row_type supplies the header when rows is empty (an empty grid still
    emits its header line).
    """
    import csv as _csv

    writer = _csv.writer(fh, lineterminator="\n")
    if rows:
        row_type = type(rows[0])
    if row_type is None:
        raise ValueError("row_type is required to emit a header for no rows")
    cols = [f.name for f in fields(row_type)]
    writer.writerow(cols)
    for row in rows:
        writer.writerow(
            ["" if getattr(row, c) is None else getattr(row, c) for c in cols])


# ---------------------------------------------------------------------------
# per-trial event decisions


def _scale(points: np.ndarray) -> float:
    s = float(np.max(np.abs(points))) if points.size else 0.0
    return s if s > 0.0 else 1.0


def _lp_common(points: np.ndarray, offsets: np.ndarray) -> bool:
    d = points.shape[1]
    m = offsets.shape[0] - 1
    rows = d * (m - 1) + m
    pts = np.ascontiguousarray(points / _scale(points))
    status, _, _ = kernels.hulls_common_feasibility(
        pts, offsets, _SOLVE_TOL, 200 + 25 * rows + 2 * points.shape[0])
    if status == -1:
        raise SolverFailure("hull-intersection solve failed during MC trial")
    return status == 1


def _center_in_hull(points: np.ndarray, center: np.ndarray) -> bool:
    d = points.shape[1]
    if d == 2:
        rel = points - center
        tol = 1e-9 * _scale(rel)
        return bool(kernels.origin_in_hull_2d(
            np.ascontiguousarray(rel[:, 0]), np.ascontiguousarray(rel[:, 1]), tol))
    scale = _scale(points - center)
    pts = np.ascontiguousarray((points - center) / scale)
    status, _ = kernels.hull_membership(
        pts, np.zeros(d), _SOLVE_TOL, 200 + 25 * (d + 1) + 2 * points.shape[0])
    if status == -1:
        raise SolverFailure("membership solve failed during MC trial")
    return status == 1


def _some_pair_box_disjoint(points: np.ndarray, offsets: np.ndarray) -> bool:
    """Exists a class pair with disjoint bounding boxes (=> disjoint hulls)."""
    m = offsets.shape[0] - 1
    d = points.shape[1]
    lo = np.empty((m, d))
    hi = np.empty((m, d))
    for i in range(m):
        block = points[offsets[i]:offsets[i + 1]]
        lo[i] = block.min(axis=0)
        hi[i] = block.max(axis=0)
    for k in range(d):
        i_max = int(np.argmax(lo[:, k]))
        j_min = int(np.argmin(hi[:, k]))
        if i_max != j_min:
            if lo[i_max, k] > hi[j_min, k]:
                return True
            continue
        # the same class holds both extremes; compare against runners-up
        lo_k = lo[:, k].copy()
        lo_k[i_max] = -np.inf
        i2 = int(np.argmax(lo_k))
        hi_k = hi[:, k].copy()
        hi_k[j_min] = np.inf
        j2 = int(np.argmin(hi_k))
        if m > 1 and (lo[i_max, k] > hi[j2, k] or lo_k[i2] > hi[j_min, k]):
            return True
    return False


def _decide_tverberg(points, offsets, center) -> bool:
    m = offsets.shape[0] - 1
    if m == 1:
        return _center_in_hull(points, center)
    if _some_pair_box_disjoint(points, offsets):
        return False
    if points.shape[1] == 2 and center is not None:
        rel = points - center
        tol = 1e-9 * _scale(rel)
        rx = np.ascontiguousarray(rel[:, 0])
        ry = np.ascontiguousarray(rel[:, 1])
        all_contain = True
        for i in range(m):
            if not kernels.origin_in_hull_2d(rx[offsets[i]:offsets[i + 1]],
                                             ry[offsets[i]:offsets[i + 1]], tol):
                all_contain = False
                break
        if all_contain:
            return True
    return _lp_common(points, offsets)


def _decide_box(points, offsets, center) -> bool:
    m = offsets.shape[0] - 1
    if m == 1:
        block = points[offsets[0]:offsets[1]]
        return bool(np.all(block.min(axis=0) <= center)
                    and np.all(center <= block.max(axis=0)))
    lo = np.max([points[offsets[i]:offsets[i + 1]].min(axis=0) for i in range(m)], axis=0)
    hi = np.min([points[offsets[i]:offsets[i + 1]].max(axis=0) for i in range(m)], axis=0)
    return bool(np.all(lo <= hi))


def _decide_pairwise_mle(points, offsets, center) -> bool:
    m = offsets.shape[0] - 1
    two = np.zeros(3, dtype=np.int64)
    for i in range(m):
        for j in range(i + 1, m):
            a = points[offsets[i]:offsets[i + 1]]
            b = points[offsets[j]:offsets[j + 1]]
            pair = np.vstack([a, b])
            two[1] = a.shape[0]
            two[2] = a.shape[0] + b.shape[0]
            if not _decide_tverberg(pair, two, center):
                return False
    return True


def _decide_tolerance(points, offsets, t) -> bool:
    """Tolerance >= t: every removal of exactly t points leaves a common point."""
    from itertools import combinations

    total = points.shape[0]
    if t == 0:
        return _lp_common(points, offsets)
    if t >= total:
        return False
    m = offsets.shape[0] - 1
    keep = np.ones(total, dtype=bool)
    for subset in combinations(range(total), t):
        keep[:] = True
        keep[list(subset)] = False
        parts, sizes = [], []
        empty = False
        for i in range(m):
            part = points[offsets[i]:offsets[i + 1]][keep[offsets[i]:offsets[i + 1]]]
            if part.shape[0] == 0:
                empty = True
                break
            parts.append(part)
            sizes.append(part.shape[0])
        if empty:
            return False
        sub_off = np.zeros(m + 1, dtype=np.int64)
        np.cumsum(sizes, out=sub_off[1:])
        if not _lp_common(np.vstack(parts), sub_off):
            return False
    return True


def _equipartition_offsets(m: int, n: int) -> np.ndarray:
    return np.arange(m + 1, dtype=np.int64) * n


def _group_by_color(points: np.ndarray, colors: np.ndarray, m: int):
    """Stable per-color grouping; returns (grouped points, offsets, any_empty)."""
    counts = np.bincount(colors, minlength=m)
    order = np.argsort(colors, kind="stable")
    offsets = np.zeros(m + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    return points[order], offsets, bool(np.any(counts == 0))


def estimate_event(
    spec: ModelSpec,
    event: str,
    trials: int,
    seed: int | None = None,
    t: int | None = None,
    threads: int = 1,
) -> TrialEstimate:
    """Monte Carlo estimate of one partition event with a Wilson 95% CI."""
    if event not in EVENTS:
        raise ValueError(f"unknown event {event!r}; options: {EVENTS}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if event in ("radon", "radon_tolerance") and spec.m != 2:
        raise ValueError(f"{event} needs m = 2")
    if event == "hemisphere" and spec.m != 1:
        raise ValueError("hemisphere event needs m = 1 (one color class)")
    if event in ("tverberg_tolerance", "radon_tolerance"):
        if t is None or t < 0:
            raise ValueError(f"{event} needs a tolerance t >= 0")
        ppt = spec.points_per_trial
        if ppt > TOLERANCE_GUARD_POINTS and t > TOLERANCE_GUARD_TMAX:
            raise GuardRefused(
                f"tolerance event on {ppt} points with t={t} exceeds the "
                f"enumeration guard")
    elif t is not None:
        raise ValueError(f"event {event!r} takes no tolerance parameter")

    use_seed = spec.seed if seed is None else seed
    event_id = event if t is None else f"{event}(t={t})"
    center = np.asarray(spec.dist.center)

    chunks = []
    start = 0
    while start < trials:
        stop = min(start + _CHUNK, trials)
        chunks.append((start, stop))
        start = stop

    def run_chunk(bounds):
        lo, hi = bounds
        count = hi - lo
        ppt = spec.points_per_trial
        pts = sample_points(spec.dist, count * ppt, use_seed,
                            start_index=lo * ppt).reshape(count, ppt, -1)
        colors = None
        if spec.model == "allocation":
            colors = sample_colors(spec.m, count * ppt, use_seed,
                                   start_index=lo * ppt).reshape(count, ppt)
        successes = 0
        empties = 0
        eq_off = _equipartition_offsets(spec.m, spec.n) \
            if spec.model == "equipartition" else None
        for i in range(count):
            if spec.model == "equipartition":
                trial_pts, offsets = pts[i], eq_off
            else:
                trial_pts, offsets, empty = _group_by_color(pts[i], colors[i], spec.m)
                if empty:
                    empties += 1
                    continue
            if event in ("tverberg", "radon"):
                ok = _decide_tverberg(trial_pts, offsets, center)
            elif event == "hemisphere":
                ok = not _center_in_hull(trial_pts, center)
            elif event == "box_tverberg":
                ok = _decide_box(trial_pts, offsets, center)
            elif event == "pairwise_mle":
                ok = _decide_pairwise_mle(trial_pts, offsets, center)
            else:
                ok = _decide_tolerance(trial_pts, offsets, t)
            successes += ok
        return successes, empties

    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run_chunk, chunks))
    else:
        results = [run_chunk(c) for c in chunks]
    successes = sum(r[0] for r in results)
    empties = sum(r[1] for r in results)
    lo_ci, hi_ci = wilson_interval(successes, trials)
    return TrialEstimate(successes=successes, trials=trials,
                         estimate=successes / trials, ci_low=lo_ci,
                         ci_high=hi_ci, seed=use_seed, event_id=event_id,
                         empty_class_trials=empties)


# ---------------------------------------------------------------------------
# experiments


def sandwich_experiment(grid, dist_kind: str, trials: int, seed: int,
                        threads: int = 1) -> list:
    """Estimate the equipartition Tverberg probability over a grid of
    (m, n, d) cells and attach the closed-form lower/upper bounds.

    The upper bound needs independent coordinate signs, so dist_kind must be
    product-symmetric.  A row is flagged when the point estimate leaves
    [lower - hw, upper + hw], hw the Wilson half-width.
    """
    from .sampling import PRODUCT_SYMMETRIC_KINDS

    if dist_kind not in PRODUCT_SYMMETRIC_KINDS:
        raise ValueError(
            f"sandwich rows need a product-symmetric kind, got {dist_kind!r}")
    rows = []
    for idx, (m, n, d) in enumerate(grid):
        cell_seed = _mix64(seed, idx + 1)
        spec = ModelSpec("equipartition", m=m, n=n, seed=cell_seed,
                         dist=BalancedDistribution(dist_kind, d))
        est = estimate_event(spec, "tverberg", trials, threads=threads)
        lower = tverberg_equipartition_lower(m, n, d)
        upper = tverberg_equipartition_upper(m, n, d)
        hw = est.half_width
        violation = est.estimate < lower - hw or est.estimate > upper + hw
        rows.append(SweepRow(event_id="tverberg", m=m, n=n, d=d,
                             successes=est.successes, trials=trials,
                             estimate=est.estimate, ci_low=est.ci_low,
                             ci_high=est.ci_high, seed=cell_seed,
                             lower_bound=lower, upper_bound=upper,
                             violation=violation))
    return rows


def threshold_sweep(d: int, m_list, c_list, dist_kind: str, trials: int,
                    seed: int, model: str = "equipartition",
                    threads: int = 1) -> list:
    """Tverberg estimates along n = ceil(c log2 m) (equipartition) or
    k = ceil(c m log2(m) lnln m) (allocation)."""
    rows = []
    idx = 0
    for c in c_list:
        for m in m_list:
            idx += 1
            cell_seed = _mix64(seed, idx)
            dist = BalancedDistribution(dist_kind, d)
            if model == "equipartition":
                n = max(1, math.ceil(c * math.log2(m)))
                spec = ModelSpec(model, m=m, n=n, seed=cell_seed, dist=dist)
                n_field, k_field = n, None
            elif model == "allocation":
                if m < 3:
                    raise ValueError("allocation threshold sweep needs m >= 3")
                k = max(m, math.ceil(c * m * math.log2(m) * math.log(math.log(m))))
                spec = ModelSpec(model, m=m, k=k, seed=cell_seed, dist=dist)
                n_field, k_field = None, k
            else:
                raise ValueError(f"unknown model {model!r}")
            est = estimate_event(spec, "tverberg", trials, threads=threads)
            rows.append(SweepRow(event_id="tverberg", m=m, n=n_field, k=k_field,
                                 d=d, c=c, successes=est.successes,
                                 trials=trials, estimate=est.estimate,
                                 ci_low=est.ci_low, ci_high=est.ci_high,
                                 seed=cell_seed,
                                 empty_class_trials=est.empty_class_trials))
    return rows


def pertsep_convergence(m: int, d: int, k_list, dist_kind: str, trials: int,
                        seed: int, override: bool = False) -> list:
    """Distribution of the min-over-color-pairs PertSEP*0 per allocation size.

    Exact minimum-removal counts come from the 1-D threshold scan; higher
    dimensions are guarded to small k where the hyperplane enumeration is
    exact and affordable.
    """
    if d != 1 and max(k_list) > TOLERANCE_GUARD_POINTS and not override:
        raise GuardRefused(
            "pertsep_convergence beyond d=1 is limited to small k "
            "(exact enumeration cost); pass override=True to run anyway")
    from .separability import LabeledDataset, min_removals_to_separable

    rows = []
    for ki, k in enumerate(k_list):
        cell_seed = _mix64(seed, ki + 1)
        dist = BalancedDistribution(dist_kind, d)
        spec = ModelSpec("allocation", m=m, k=k, seed=cell_seed, dist=dist)
        ppt = spec.points_per_trial
        mins = []
        empties = 0
        for trial in range(trials):
            pts = sample_points(dist, ppt, cell_seed, start_index=trial * ppt)
            colors = sample_colors(m, ppt, cell_seed, start_index=trial * ppt)
            counts = np.bincount(colors, minlength=m)
            if np.any(counts == 0):
                empties += 1
                continue
            worst = np.inf
            for i in range(m):
                for j in range(i + 1, m):
                    sel = (colors == i) | (colors == j)
                    n_pair = int(sel.sum())
                    if d == 1:
                        signs = np.where(colors[sel] == i, 1.0, -1.0)
                        removals = int(kernels.min_misclass_1d(
                            np.ascontiguousarray(pts[sel, 0]), signs))
                    else:
                        ds = LabeledDataset.from_label_values(
                            pts[sel], colors[sel])
                        removals = min_removals_to_separable(ds, override=override)[0]
                    worst = min(worst, removals / n_pair)
            mins.append(worst)
        arr = np.asarray(mins)
        rows.append(PertsepRow(m=m, d=d, k=k, trials=trials,
                               mean_min_pertsep0=float(arr.mean()),
                               p05_min_pertsep0=float(np.percentile(arr, 5)),
                               seed=cell_seed, empty_class_trials=empties))
    return rows
