"""Hot numeric kernels.

Everything here is written in numba-compatible numpy style (plain loops,
preallocated arrays) and compiled via :func:`tverberg_lab.backends.jit`.
Callers are expected to pass pre-scaled coordinates (max |coord| ~ 1) so the
feasibility tolerance is meaningful; the geometry module owns that contract.

Status codes shared by the feasibility kernels:
  1  feasible (certificate returned)
  0  infeasible
 -1  solver failure (iteration limit / numerical breakdown), distinct from
    infeasibility by contract
"""

import numpy as np

from .backends import jit

PIVOT_TOL = 1e-11


@jit
def _lex_smaller(T, i, j, enter, n, m, ncols):
    """Is row i lexicographically smaller than row j after scaling by the
    pivot column?  Columns are compared in the order (artificials,
    structurals), which keeps the initial artificial basis lex-positive."""
    ai = T[i, enter]
    aj = T[j, enter]
    for c in range(m + n):
        col = n + c if c < m else c - m
        vi = T[i, col] / ai
        vj = T[j, col] / aj
        if vi < vj - 1e-12:
            return True
        if vi > vj + 1e-12:
            return False
    return False


@jit
def phase1_simplex(A, b, feas_tol, max_iter):
    """Decide {lam >= 0 : A @ lam = b} by a phase-1 simplex.

    Dantzig pricing with a lexicographic ratio test: the hull-intersection
    systems are heavily degenerate (difference rows have zero right-hand
    sides), and the lexicographic tie-break is what rules out cycling and
    stalling there.  Returns (status, lam); the optimal phase-1 objective is
    the minimal L1 constraint residual, so feasibility is decided by
    comparing it against feas_tol.
    """
    m, n = A.shape
    ncols = n + m + 1
    T = np.zeros((m + 1, ncols))
    for i in range(m):
        if b[i] < 0.0:
            for j in range(n):
                T[i, j] = -A[i, j]
            T[i, ncols - 1] = -b[i]
        else:
            for j in range(n):
                T[i, j] = A[i, j]
            T[i, ncols - 1] = b[i]
        T[i, n + i] = 1.0

    # price out the artificial basis: reduced cost of column j is -sum_i T[i,j]
    obj = 0.0
    for j in range(n):
        s = 0.0
        for i in range(m):
            s += T[i, j]
        T[m, j] = -s
    for i in range(m):
        obj += T[i, ncols - 1]
    T[m, ncols - 1] = -obj

    basis = np.empty(m, dtype=np.int64)
    for i in range(m):
        basis[i] = n + i

    lam = np.zeros(n)
    it = 0
    status = -1
    while it < max_iter:
        it += 1
        enter = -1
        best = -PIVOT_TOL
        for j in range(n + m):
            if T[m, j] < best:
                best = T[m, j]
                enter = j
        if enter < 0:
            status = 1
            break

        leave = -1
        best_ratio = np.inf
        for i in range(m):
            a = T[i, enter]
            if a > PIVOT_TOL:
                r = T[i, ncols - 1] / a
                tie = 1e-9 * (1.0 + abs(best_ratio)) if leave >= 0 else 0.0
                if leave < 0 or r < best_ratio - tie:
                    best_ratio = r
                    leave = i
                elif r < best_ratio + tie and _lex_smaller(T, i, leave, enter, n, m, ncols):
                    if r < best_ratio:
                        best_ratio = r
                    leave = i
        if leave < 0:
            # phase-1 objective is bounded below; a missing pivot is numerical
            return -1, lam

        piv = 1.0 / T[leave, enter]
        for j in range(ncols):
            T[leave, j] *= piv
        T[leave, enter] = 1.0
        for i in range(m + 1):
            if i == leave:
                continue
            f = T[i, enter]
            if f != 0.0:
                for j in range(ncols):
                    T[i, j] -= f * T[leave, j]
                T[i, enter] = 0.0
        basis[leave] = enter

    if status != 1:
        return -1, lam

    resid = -T[m, ncols - 1]
    if resid > feas_tol:
        return 0, lam
    for i in range(m):
        if basis[i] < n:
            v = T[i, ncols - 1]
            lam[basis[i]] = v if v > 0.0 else 0.0
    return 1, lam


@jit
def hulls_common_feasibility(points, offsets, feas_tol, max_iter):
    """Shared point of the convex hulls of the classes sliced by offsets.

    points is (N, d), class i owns rows offsets[i]:offsets[i+1].  Eliminates
    the shared point through the class-0 combination: for i >= 1 the rows say
    sum_j lam_0j p_0j - sum_j lam_ij p_ij = 0, plus one unit-sum row per class.
    Returns (status, x, lam) with x the witness from the class-0 weights.
    """
    N, d = points.shape
    m = offsets.shape[0] - 1
    rows = d * (m - 1) + m
    A = np.zeros((rows, N))
    b = np.zeros(rows)
    for i in range(1, m):
        r0 = (i - 1) * d
        for j in range(offsets[0], offsets[1]):
            for k in range(d):
                A[r0 + k, j] = points[j, k]
        for j in range(offsets[i], offsets[i + 1]):
            for k in range(d):
                A[r0 + k, j] = -points[j, k]
    for i in range(m):
        A[d * (m - 1) + i, offsets[i]:offsets[i + 1]] = 1.0
        b[d * (m - 1) + i] = 1.0

    status, lam = phase1_simplex(A, b, feas_tol, max_iter)
    x = np.zeros(d)
    if status == 1:
        for j in range(offsets[0], offsets[1]):
            for k in range(d):
                x[k] += lam[j] * points[j, k]
    return status, x, lam


@jit
def hull_membership(points, q, feas_tol, max_iter):
    """Is q a convex combination of the rows of points?  (status, lam)."""
    N, d = points.shape
    A = np.zeros((d + 1, N))
    b = np.zeros(d + 1)
    for j in range(N):
        for k in range(d):
            A[k, j] = points[j, k]
        A[d, j] = 1.0
    for k in range(d):
        b[k] = q[k]
    b[d] = 1.0
    return phase1_simplex(A, b, feas_tol, max_iter)


@jit
def origin_in_hull_2d(rx, ry, tol):
    """Exact planar membership of the origin via the closed-semicircle test.

    The origin lies in the hull iff the point directions do not fit in an
    open half-plane, i.e. every closed half-plane through the origin contains
    a point direction.  Points within tol of the origin decide immediately.
    """
    n = rx.shape[0]
    angles = np.empty(n)
    k = 0
    for i in range(n):
        r = np.hypot(rx[i], ry[i])
        if r <= tol:
            return True
        angles[k] = np.arctan2(ry[i], rx[i])
        k += 1
    ang = np.sort(angles[:k])
    # max circular gap > pi  <=>  all directions in an open half-plane
    max_gap = 2.0 * np.pi - (ang[k - 1] - ang[0])
    for i in range(1, k):
        g = ang[i] - ang[i - 1]
        if g > max_gap:
            max_gap = g
    return max_gap <= np.pi + 1e-12


@jit
def tukey_depth_2d(px, py, qx, qy):
    """Exact closed-half-plane depth of (qx, qy) in the planar point set.

    Evaluates the half-plane count at every critical direction (normals of
    lines through q and a data point) and at the midpoint of every arc
    between consecutive critical directions; the arc midpoints realize the
    open-arc minima, so the minimum over all candidates is exact.
    """
    n = px.shape[0]
    rx = np.empty(n)
    ry = np.empty(n)
    scale = 0.0
    for i in range(n):
        rx[i] = px[i] - qx
        ry[i] = py[i] - qy
        a = abs(rx[i])
        if a > scale:
            scale = a
        a = abs(ry[i])
        if a > scale:
            scale = a
    tol = 1e-9 * (scale if scale > 1.0 else 1.0)

    crit = np.empty(2 * n)
    k = 0
    for i in range(n):
        if np.hypot(rx[i], ry[i]) > tol:
            a = np.arctan2(ry[i], rx[i])
            crit[k] = (a + 0.5 * np.pi) % (2.0 * np.pi)
            crit[k + 1] = (a - 0.5 * np.pi) % (2.0 * np.pi)
            k += 2
    if k == 0:
        return n  # all points coincide with q: inside every half-plane
    cs = np.sort(crit[:k])

    best = n
    for t in range(2 * k):
        if t < k:
            theta = cs[t]
        else:
            j = t - k
            nxt = cs[j + 1] if j + 1 < k else cs[0] + 2.0 * np.pi
            theta = 0.5 * (cs[j] + nxt)
        ux = np.cos(theta)
        uy = np.sin(theta)
        c = 0
        for i in range(n):
            if ux * rx[i] + uy * ry[i] <= tol:
                c += 1
        if c < best:
            best = c
    return best


@jit
def min_misclass_1d(xs, ys):
    """Minimum strict misclassifications over all 1-D thresholds.

    ys holds +1/-1 labels; a threshold classifies by side with either
    orientation.  Points exactly at the threshold are handled exactly: a
    perturbed threshold moves the whole coincident cluster to one common
    side, so the cluster contributes min(wrong-if-left, wrong-if-right).
    """
    n = xs.shape[0]
    order = np.argsort(xs, kind="mergesort")
    x = xs[order]
    pos = np.zeros(n + 1, dtype=np.int64)  # prefix count of +1
    neg = np.zeros(n + 1, dtype=np.int64)
    for i in range(n):
        pos[i + 1] = pos[i] + (1 if ys[order[i]] > 0 else 0)
        neg[i + 1] = neg[i] + (1 if ys[order[i]] < 0 else 0)
    tot_pos = pos[n]
    tot_neg = neg[n]

    best = tot_pos if tot_pos < tot_neg else tot_neg  # threshold beyond data
    i = 0
    while i < n:
        j = i
        while j < n and x[j] == x[i]:
            j += 1
        c_pos = pos[j] - pos[i]
        c_neg = neg[j] - neg[i]
        cluster = c_pos if c_pos < c_neg else c_neg
        # orientation: -1 labels left of threshold, +1 right
        a = pos[i] + (tot_neg - neg[j]) + cluster
        # flipped orientation
        bcost = neg[i] + (tot_pos - pos[j]) + cluster
        if a < best:
            best = a
        if bcost < best:
            best = bcost
        i = j
    return best
