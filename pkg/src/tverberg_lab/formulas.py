"""Closed-form evaluation of the probability bounds and threshold expressions.

Binomial half-sums are evaluated exactly over Python integers when the row
size allows it (so identities like the radius-2(d+1) value 1/2 come out
exact) and in log space (lgamma + logsumexp) for large rows.  The urn
coverage probability is exact via truncated-EGF convolution in log space.
Pure functions throughout; safe for concurrent use.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp

_EXACT_ROW_LIMIT = 4096


def _binom_half_sum(n: int, lo: int, hi: int) -> float:
    """sum_{k=lo..hi} C(n,k) 2^{-n}, clamped into [0,1]."""
    hi = min(hi, n)
    lo = max(lo, 0)
    if hi < lo:
        return 0.0
    if n <= _EXACT_ROW_LIMIT:
        total = sum(math.comb(n, k) for k in range(lo, hi + 1))
        return min(total / (1 << n), 1.0)
    ks = np.arange(lo, hi + 1, dtype=np.float64)
    logs = gammaln(n + 1) - gammaln(ks + 1) - gammaln(n - ks + 1)
    val = float(np.exp(logsumexp(logs) - n * math.log(2.0)))
    return min(max(val, 0.0), 1.0)


def _check_pos(**named):
    for name, v in named.items():
        if int(v) != v or v < 1:
            raise ValueError(f"{name} must be a positive integer, got {v}")


def cover_radon_probability(n: int, d: int) -> float:
    """Probability that n uniformly 2-colored i.i.d. continuous points in
    dimension d form a Radon partition: 1 - 2^{-n+1} sum_{k<=d} C(n-1,k)."""
    _check_pos(n=n, d=d)
    return max(0.0, 1.0 - _binom_half_sum(n - 1, 0, d))


def hemisphere_probability(n: int, d: int) -> float:
    """Probability that n i.i.d. balanced points all lie in one closed
    half-space through the center: 2^{-n+1} sum_{k<=d-1} C(n-1,k)."""
    _check_pos(n=n, d=d)
    return _binom_half_sum(n - 1, 0, d - 1)


def tverberg_equipartition_lower(m: int, n: int, d: int) -> float:
    """(1 - hemisphere_probability(n, d))^m."""
    _check_pos(m=m, n=n, d=d)
    return (1.0 - hemisphere_probability(n, d)) ** m


def tverberg_equipartition_upper(m: int, n: int, d: int) -> float:
    """(2(1-2^{-n})^m - (1-2^{-n+1})^m)^d, clamped into [0,1]."""
    _check_pos(m=m, n=n, d=d)
    a = 1.0 - 2.0 ** (-n)
    b = 1.0 - 2.0 ** (-n + 1)
    inner = 2.0 * a**m - b**m
    return min(max(inner, 0.0), 1.0) ** d


def tverberg_tolerance_lower(
    m: int, n: int, d: int, t: int, corrected: bool = True
) -> float:
    """(1 - 2^{-N} sum_i C(N,i))^m with N = floor(n/2d).

    The printed sum runs i=1..t, which makes the t=0 bound vacuously 1;
    corrected=True (default) uses the true binomial tail i=0..t.  Intended
    for n >= 2d; smaller n gives N=0 and a degenerate bound of 0.
    """
    _check_pos(m=m, n=n, d=d)
    if t < 0:
        raise ValueError("tolerance t must be >= 0")
    N = n // (2 * d)
    tail = _binom_half_sum(N, 0 if corrected else 1, t)
    return max(0.0, 1.0 - tail) ** m


def radon_tolerance_lower(k: int, d: int, t: int) -> float:
    """1 - 2^{-N} sum_{i=0..t} C(N,i) with N = floor(k/(2d+2)), clamped."""
    _check_pos(k=k, d=d)
    if t < 0:
        raise ValueError("tolerance t must be >= 0")
    N = k // (2 * d + 2)
    return max(0.0, 1.0 - _binom_half_sum(N, 0, t))


@dataclass(frozen=True)
class UrnParams:
    """m urns, target of n balls per urn, k uniform independent throws."""

    urns: int
    per_urn_target: int
    throws: int

    def __post_init__(self):
        _check_pos(urns=self.urns, per_urn_target=self.per_urn_target,
                   throws=self.throws)


def urn_coverage_probability(u: UrnParams) -> float:
    """Exact P(every urn holds >= n balls after k throws into m urns).

    Computed as (k!/m^k) [x^k] (sum_{i=n}^{k} x^i/i!)^m by log-space
    polynomial convolution, O(m k^2).
    """
    m, n, k = u.urns, u.per_urn_target, u.throws
    if m * n > k:
        return 0.0
    if m == 1:
        return 1.0
    base = np.full(k + 1, -np.inf)
    degs = np.arange(n, k + 1)
    base[n:] = -gammaln(degs + 1.0)
    cur = base.copy()
    for _ in range(m - 1):
        new = np.full(k + 1, -np.inf)
        # coefficient floor: every factor contributes degree >= n
        for deg in range(n, k + 1):
            seg = cur[: deg + 1] + base[deg::-1]
            mx = np.max(seg)
            if mx == -np.inf:
                continue
            new[deg] = mx + math.log(np.sum(np.exp(seg - mx)))
        cur = new
    if cur[k] == -np.inf:
        return 0.0
    log_p = gammaln(k + 1.0) - k * math.log(m) + cur[k]
    return min(math.exp(min(log_p, 0.0)), 1.0)


def allocation_tverberg_lower(
    m: int,
    k: int,
    d: int,
    t: int | None = None,
    n_inner: int | None = None,
    corrected: bool = True,
) -> tuple[float, int]:
    """Lower bound for the random-allocation model via urn coverage.

    With t given: P(N_n(m) <= k) * tverberg_tolerance_lower(m, n, d, t);
    with t absent: the same coverage factor times the tolerance-free
    equipartition lower bound.  n_inner=None scans n in [1, floor(k/m)] and
    returns the maximizing (value, n).
    """
    _check_pos(m=m, k=k, d=d)
    if n_inner is not None:
        _check_pos(n_inner=n_inner)
        cov = urn_coverage_probability(UrnParams(m, n_inner, k))
        if t is None:
            inner = tverberg_equipartition_lower(m, n_inner, d)
        else:
            inner = tverberg_tolerance_lower(m, n_inner, d, t, corrected)
        return cov * inner, n_inner
    best = (0.0, 1)
    for n in range(1, max(1, k // m) + 1):
        val, _ = allocation_tverberg_lower(m, k, d, t, n, corrected)
        if val > best[0]:
            best = (val, n)
    return best


def erdos_renyi_limit(x: float, m: int) -> float:
    """Urn-coverage limit function exp(-e^{-x} / (m-1)!)."""
    _check_pos(m=m)
    return math.exp(-math.exp(-x) / math.factorial(m - 1))


def threshold_sample_size(m: int, epsilon: float, model: str) -> int:
    """Sample size at the Tverberg threshold, per model.

    equipartition: ceil((1+eps) log2 m) points per color;
    allocation: ceil((1+eps) m log2(m) ln(ln m)) total points (needs m >= 3).
    """
    _check_pos(m=m)
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    if model == "equipartition":
        return max(1, math.ceil((1.0 + epsilon) * math.log2(m)))
    if model == "allocation":
        if m < 3:
            raise ValueError("allocation threshold needs m >= 3 (ln ln m)")
        return max(1, math.ceil(
            (1.0 + epsilon) * m * math.log2(m) * math.log(math.log(m))
        ))
    raise ValueError(f"unknown model {model!r}")


def soberon_tolerance_bound(N: int, m: int, d: int, epsilon: float) -> int:
    """Reference curve: largest t guaranteed at failure probability epsilon.

    Solves t + 1 <= N/m - sqrt((1/2)[(d+1)(m-1)N ln(Nm) + N ln(1/eps)])
    for the maximal integer t; -1 means no tolerance is guaranteed.
    """
    _check_pos(N=N, m=m, d=d)
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0,1)")
    rhs = N / m - math.sqrt(
        0.5 * ((d + 1) * (m - 1) * N * math.log(N * m) + N * math.log(1.0 / epsilon))
    )
    return max(-1, math.floor(rhs) - 1)


@dataclass(frozen=True)
class BoundReport:
    """A named probability bound with the parameters that produced it."""

    formula_id: str
    params: dict
    value: float
    side: str  # exact | lower | upper
    notes: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"bound value {self.value} outside [0,1]")
        if self.side not in ("exact", "lower", "upper"):
            raise ValueError(f"unknown side {self.side!r}")


_PRINTED_TOL_NOTE = (
    "printed lower-bound sum starts at i=1 (vacuous bound 1 at t=0); "
    "corrected=True uses the true binomial tail i=0..t"
)
_PRINTED_ALLOC_NOTE = (
    "printed inner sum limit is k where the tolerance t is expected; "
    "evaluated with limit t"
)


def bound_report(formula_id: str, **params) -> BoundReport:
    """Uniform dispatcher used by the CLI `bounds` subcommand."""
    notes: tuple = ()
    if formula_id == "cover":
        value, side = cover_radon_probability(params["n"], params["d"]), "exact"
    elif formula_id == "hemisphere":
        value, side = hemisphere_probability(params["n"], params["d"]), "exact"
    elif formula_id == "tverberg-lower":
        value = tverberg_equipartition_lower(params["m"], params["n"], params["d"])
        side = "lower"
    elif formula_id == "tverberg-upper":
        value = tverberg_equipartition_upper(params["m"], params["n"], params["d"])
        side = "upper"
    elif formula_id == "tverberg-tolerance-lower":
        corrected = params.setdefault("corrected", True)
        value = tverberg_tolerance_lower(
            params["m"], params["n"], params["d"], params["t"], corrected
        )
        side = "lower"
        notes = (_PRINTED_TOL_NOTE,)
    elif formula_id == "radon-tolerance-lower":
        value = radon_tolerance_lower(params["k"], params["d"], params["t"])
        side = "lower"
    elif formula_id == "urn":
        value = urn_coverage_probability(
            UrnParams(params["m"], params["n"], params["k"])
        )
        side = "exact"
    elif formula_id == "allocation-lower":
        value, n_used = allocation_tverberg_lower(
            params["m"], params["k"], params["d"],
            params.get("t"), params.get("n_inner"),
            params.setdefault("corrected", True),
        )
        params["n_inner"] = n_used
        side = "lower"
        notes = (_PRINTED_ALLOC_NOTE,)
    elif formula_id == "erdos-renyi-limit":
        value, side = erdos_renyi_limit(params["x"], params["m"]), "exact"
    else:
        raise ValueError(f"unknown formula {formula_id!r}")
    return BoundReport(formula_id=formula_id, params=dict(params),
                       value=float(value), side=side, notes=notes)
