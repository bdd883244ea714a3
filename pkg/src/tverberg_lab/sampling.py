"""Random generation of the two partition models over balanced distributions.

Every point consumes a fixed number of 64-bit words from a counter-based
Philox stream keyed by (seed, stream id), so point i is a pure function of
(seed, i): parallel generation of disjoint index ranges reproduces serial
output bit-for-bit, and Monte Carlo trial t simply owns the index range
[t*points_per_trial, (t+1)*points_per_trial).  Gaussians use the inverse CDF
so the per-point word budget stays fixed.

All supported kinds are centrally symmetric about their center, hence
balanced: every hyperplane through the center splits the mass in half.
Radial projection onto a sphere about the center preserves whether the
center lies in a class hull, which is what the upper/lower bound experiments
rely on; sphere_projection implements that reduction.

Product symmetry (independent coordinate signs) holds for standard_gaussian
and uniform_cube only; upper-bound experiments restrict to those kinds.
"""

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from .errors import DimensionMismatch, EmptyClassError
from .geometry import ColoredPartition, PointSet, as_point

KINDS = (
    "standard_gaussian",
    "uniform_ball",
    "uniform_sphere",
    "uniform_cube",
    "symmetric_two_gaussian_mixture",
)
PRODUCT_SYMMETRIC_KINDS = ("standard_gaussian", "uniform_cube")

_MASK64 = (1 << 64) - 1
_MIXTURE_OFFSET = 2.0

# counter streams within one seed
_STREAM_POINTS = 0
_STREAM_COLORS = 1


@dataclass(frozen=True)
class BalancedDistribution:
    kind: str
    dim: int
    center: tuple = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown distribution kind {self.kind!r}")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        center = self.center
        if center is None:
            center = (0.0,) * self.dim
        center = tuple(float(c) for c in np.asarray(center, dtype=np.float64))
        if len(center) != self.dim:
            raise DimensionMismatch("center must have length dim")
        object.__setattr__(self, "center", center)

    @property
    def words_per_point(self) -> int:
        if self.kind in ("uniform_ball", "symmetric_two_gaussian_mixture"):
            return self.dim + 1
        return self.dim

    @property
    def product_symmetric(self) -> bool:
        return self.kind in PRODUCT_SYMMETRIC_KINDS

    def to_dict(self) -> dict:
        return {"kind": self.kind, "dim": self.dim, "center": list(self.center)}

    @classmethod
    def from_dict(cls, d: dict) -> "BalancedDistribution":
        return cls(kind=d["kind"], dim=int(d["dim"]),
                   center=tuple(d.get("center") or ()) or None)


@dataclass(frozen=True)
class ModelSpec:
    model: str  # equipartition | allocation
    m: int
    dist: BalancedDistribution
    n: int | None = None  # points per color (equipartition)
    k: int | None = None  # total points (allocation)
    seed: int = 0

    def __post_init__(self):
        if self.model not in ("equipartition", "allocation"):
            raise ValueError(f"unknown model {self.model!r}")
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.model == "equipartition":
            if self.n is None or self.n < 1:
                raise ValueError("equipartition needs n >= 1")
        else:
            if self.k is None or self.k < self.m:
                raise ValueError("allocation needs k >= m")

    @property
    def points_per_trial(self) -> int:
        return self.m * self.n if self.model == "equipartition" else self.k

    def to_json(self) -> str:
        d = {"model": self.model, "m": self.m, "seed": self.seed,
             "dist": self.dist.to_dict()}
        if self.n is not None:
            d["n"] = self.n
        if self.k is not None:
            d["k"] = self.k
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_json(cls, s: str) -> "ModelSpec":
        d = json.loads(s)
        return cls(model=d["model"], m=int(d["m"]),
                   dist=BalancedDistribution.from_dict(d["dist"]),
                   n=int(d["n"]) if "n" in d else None,
                   k=int(d["k"]) if "k" in d else None,
                   seed=int(d.get("seed", 0)))


def _uniforms(seed: int, stream: int, start_word: int, n_words: int) -> np.ndarray:
    # Philox.advance counts 4-word blocks relative to float64 consumption
    bg = np.random.Philox(key=((stream & _MASK64) << 64) | (seed & _MASK64))
    blocks, rem = divmod(start_word, 4)
    if blocks:
        bg.advance(blocks)
    gen = np.random.Generator(bg)
    if rem:
        gen.random(rem)
    return gen.random(n_words)


def _gaussian(u: np.ndarray) -> np.ndarray:
    return ndtri(np.clip(u, 1e-300, 1.0 - 1e-16))


def sample_points(dist: BalancedDistribution, count: int, seed: int,
                  start_index: int = 0) -> np.ndarray:
    """Points start_index .. start_index+count-1 of the (seed, dist) sequence."""
    if count == 0:
        return np.empty((0, dist.dim))
    d, w = dist.dim, dist.words_per_point
    u = _uniforms(seed, _STREAM_POINTS, start_index * w, count * w).reshape(count, w)
    kind = dist.kind
    if kind == "standard_gaussian":
        pts = _gaussian(u)
    elif kind == "uniform_cube":
        pts = 2.0 * u - 1.0
    elif kind == "uniform_sphere":
        g = _gaussian(u)
        norm = np.maximum(np.linalg.norm(g, axis=1, keepdims=True), 1e-300)
        pts = g / norm
    elif kind == "uniform_ball":
        g = _gaussian(u[:, :d])
        norm = np.maximum(np.linalg.norm(g, axis=1, keepdims=True), 1e-300)
        radius = np.maximum(u[:, d:], 1e-300) ** (1.0 / d)
        pts = g / norm * radius
    else:  # symmetric_two_gaussian_mixture
        sign = np.where(u[:, 0] < 0.5, -1.0, 1.0)
        pts = _gaussian(u[:, 1:])
        pts[:, 0] += sign * _MIXTURE_OFFSET
    return pts + np.asarray(dist.center)


def sample_colors(m: int, count: int, seed: int, start_index: int = 0) -> np.ndarray:
    """Uniform color labels 0..m-1 for points start_index onward."""
    u = _uniforms(seed, _STREAM_COLORS, start_index, count)
    return np.minimum((u * m).astype(np.int64), m - 1)


def sample_equipartition(spec: ModelSpec) -> ColoredPartition:
    """m classes of exactly n i.i.d. points each; class i is block i of the stream."""
    if spec.model != "equipartition":
        raise ValueError("spec.model must be 'equipartition'")
    pts = sample_points(spec.dist, spec.m * spec.n, spec.seed)
    classes = tuple(
        PointSet(spec.dist.dim, pts[i * spec.n:(i + 1) * spec.n])
        for i in range(spec.m)
    )
    return ColoredPartition(spec.dist.dim, classes)


@dataclass(frozen=True, eq=False)
class AllocationSample:
    """k i.i.d. points with i.i.d. uniform colors; colors may be empty.

    ColoredPartition rejects empty classes by contract, so allocation draws
    live in this looser wrapper; to_partition() converts when possible.
    """

    dim: int
    points: np.ndarray
    colors: np.ndarray
    m: int

    @property
    def class_sizes(self) -> np.ndarray:
        return np.bincount(self.colors, minlength=self.m)

    @property
    def has_empty_class(self) -> bool:
        return bool(np.any(self.class_sizes == 0))

    def to_partition(self) -> ColoredPartition:
        if self.has_empty_class:
            raise EmptyClassError("allocation produced an empty color")
        classes = tuple(
            PointSet(self.dim, self.points[self.colors == c]) for c in range(self.m)
        )
        return ColoredPartition(self.dim, classes)


def sample_allocation(spec: ModelSpec) -> AllocationSample:
    """k i.i.d. points, each independently uniformly colored among m colors."""
    if spec.model != "allocation":
        raise ValueError("spec.model must be 'allocation'")
    pts = sample_points(spec.dist, spec.k, spec.seed)
    colors = sample_colors(spec.m, spec.k, spec.seed)
    return AllocationSample(dim=spec.dist.dim, points=pts, colors=colors, m=spec.m)


def sphere_projection(p: ColoredPartition, center) -> ColoredPartition:
    """Radially project every point onto the unit sphere about center.

    Preserves whether center lies in each class hull; rejects points that
    coincide with the center (direction undefined).
    """
    c = as_point(center, p.dim)
    scale = max(float(np.max(np.abs(cls.points - c))) for cls in p.classes)
    classes = []
    for cls in p.classes:
        rel = cls.points - c
        norms = np.linalg.norm(rel, axis=1, keepdims=True)
        if np.any(norms <= 1e-12 * max(scale, 1.0)):
            raise ValueError("a point coincides with the projection center")
        classes.append(PointSet(p.dim, c + rel / norms))
    return ColoredPartition(p.dim, tuple(classes))
