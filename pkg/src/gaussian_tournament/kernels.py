"""Hot numeric kernels, each in a numba and a vectorised numpy flavour.

The public names at the bottom of the module dispatch to one flavour chosen
once at import time (see :mod:`gaussian_tournament._accel`).  Both flavours are
importable directly as ``<name>_numba`` / ``<name>_numpy`` so that tests and
``benchmarks/bench_kernels.py`` can compare them.

Conventions shared by all kernels:

* point sets are ``(n, d)`` float64 arrays already mapped into coordinates in
  which the relevant metric is Euclidean;
* ties are always broken towards the smallest index.
"""
import numpy as np

from ._accel import USE_NUMBA, njit

# ---------------------------------------------------------------------------
# median of block means, column-wise
# ---------------------------------------------------------------------------


def block_bounds(n, k):
    """Start offsets of ``k`` contiguous blocks; the last absorbs the remainder."""
    size = n // k
    return np.arange(k, dtype=np.int64) * size


def mom_columns_numpy(Z, k):
    Z = np.asarray(Z, dtype=np.float64)
    n = Z.shape[0]
    starts = block_bounds(n, k)
    sums = np.add.reduceat(Z, starts, axis=0)
    counts = np.diff(np.append(starts, n)).astype(np.float64)
    means = sums / counts[:, None]
    return np.median(means, axis=0)


@njit
def mom_columns_numba(Z, k):
    n, m = Z.shape
    size = n // k
    out = np.empty(m)
    means = np.empty(k)
    for j in range(m):
        for b in range(k):
            lo = b * size
            hi = n if b == k - 1 else lo + size
            acc = 0.0
            for i in range(lo, hi):
                acc += Z[i, j]
            means[b] = acc / (hi - lo)
        out[j] = np.median(means)
    return out


# ---------------------------------------------------------------------------
# greedy packing in index order
# ---------------------------------------------------------------------------


def greedy_centers_numpy(Y, sep):
    Y = np.asarray(Y, dtype=np.float64)
    n = Y.shape[0]
    sep2 = sep * sep
    mind = np.full(n, np.inf)
    centers = []
    i = 0
    while i < n:
        centers.append(i)
        diff = Y - Y[i]
        np.minimum(mind, np.einsum("ij,ij->i", diff, diff), out=mind)
        rest = np.flatnonzero(mind[i + 1:] >= sep2)
        if rest.size == 0:
            break
        i = i + 1 + int(rest[0])
    return np.asarray(centers, dtype=np.int64)


@njit
def greedy_centers_numba(Y, sep):
    n, d = Y.shape
    sep2 = sep * sep
    centers = np.empty(n, dtype=np.int64)
    m = 0
    for i in range(n):
        ok = True
        for c in range(m):
            j = centers[c]
            acc = 0.0
            for t in range(d):
                diff = Y[i, t] - Y[j, t]
                acc += diff * diff
            if acc < sep2:
                ok = False
                break
        if ok:
            centers[m] = i
            m += 1
    return centers[:m].copy()


# ---------------------------------------------------------------------------
# nearest centre assignment
# ---------------------------------------------------------------------------


def nearest_numpy(Y, C, budget=2_000_000):
    Y = np.asarray(Y, dtype=np.float64)
    C = np.asarray(C, dtype=np.float64)
    n = Y.shape[0]
    out = np.empty(n, dtype=np.int64)
    dist = np.empty(n)
    step = max(1, budget // max(1, C.shape[0] * C.shape[1]))
    for lo in range(0, n, step):
        block = Y[lo:lo + step]
        diff = block[:, None, :] - C[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff)
        idx = np.argmin(d2, axis=1)
        out[lo:lo + step] = idx
        dist[lo:lo + step] = d2[np.arange(block.shape[0]), idx]
    return out, np.sqrt(dist)


@njit
def nearest_numba(Y, C):
    n, d = Y.shape
    m = C.shape[0]
    out = np.empty(n, dtype=np.int64)
    dist = np.empty(n)
    for i in range(n):
        best = np.inf
        arg = 0
        for j in range(m):
            acc = 0.0
            for t in range(d):
                diff = Y[i, t] - C[j, t]
                acc += diff * diff
            if acc < best:
                best = acc
                arg = j
        out[i] = arg
        dist[i] = np.sqrt(best)
    return out, dist


# ---------------------------------------------------------------------------
# minimax point (approximate 1-centre) and farthest-point traversal
# ---------------------------------------------------------------------------


def minimax_numpy(Y, budget=2_000_000):
    Y = np.asarray(Y, dtype=np.float64)
    n = Y.shape[0]
    worst = np.empty(n)
    chunk = max(1, budget // max(1, n * Y.shape[1]))
    for lo in range(0, n, chunk):
        block = Y[lo:lo + chunk]
        diff = block[:, None, :] - Y[None, :, :]
        worst[lo:lo + chunk] = np.einsum("ijk,ijk->ij", diff, diff).max(axis=1)
    return int(np.argmin(worst))


@njit
def minimax_numba(Y):
    n, d = Y.shape
    best = np.inf
    arg = 0
    for i in range(n):
        worst = 0.0
        for j in range(n):
            acc = 0.0
            for t in range(d):
                diff = Y[i, t] - Y[j, t]
                acc += diff * diff
            if acc > worst:
                worst = acc
                if worst >= best:
                    break
        if worst < best:
            best = worst
            arg = i
    return arg


def farthest_order_numpy(Y, start, m):
    Y = np.asarray(Y, dtype=np.float64)
    n = Y.shape[0]
    m = min(m, n)
    order = np.empty(m, dtype=np.int64)
    order[0] = start
    diff = Y - Y[start]
    mind = np.einsum("ij,ij->i", diff, diff)
    for c in range(1, m):
        nxt = int(np.argmax(mind))
        order[c] = nxt
        diff = Y - Y[nxt]
        np.minimum(mind, np.einsum("ij,ij->i", diff, diff), out=mind)
    return order


@njit
def farthest_order_numba(Y, start, m):
    n, d = Y.shape
    if m > n:
        m = n
    order = np.empty(m, dtype=np.int64)
    order[0] = start
    mind = np.empty(n)
    for i in range(n):
        acc = 0.0
        for t in range(d):
            diff = Y[i, t] - Y[start, t]
            acc += diff * diff
        mind[i] = acc
    for c in range(1, m):
        nxt = 0
        best = -1.0
        for i in range(n):
            if mind[i] > best:
                best = mind[i]
                nxt = i
        order[c] = nxt
        for i in range(n):
            acc = 0.0
            for t in range(d):
                diff = Y[i, t] - Y[nxt, t]
                acc += diff * diff
            if acc < mind[i]:
                mind[i] = acc
    return order


# ---------------------------------------------------------------------------
# suprema over localisations of a star-shaped set of linear functionals
# ---------------------------------------------------------------------------
#
# For one draw with projections p_u = <G, u>, the supremum over
# localize(H, r) equals  max_u a_u * min(1, r / |u|)  with a_u = max(p_u, 0)
# (one-sided) or |p_u| (absolute).  With u sorted by norm this is the larger of
# a prefix maximum of a_u and r times a suffix maximum of a_u / |u|.


def sup_profile_numpy(P, norms, radii):
    """Per-radius sums and sums of squares of the draw-wise suprema.

    ``P`` holds non-negative scores ``a_u`` (draws x functions) with columns
    sorted by ``norms`` (ascending, all strictly positive).
    """
    P = np.asarray(P, dtype=np.float64)
    n_draw, n_fun = P.shape
    radii = np.asarray(radii, dtype=np.float64)
    if n_fun == 0:
        z = np.zeros(radii.size)
        return z, z.copy()
    prefix = np.maximum.accumulate(P, axis=1)
    scaled = P / norms[None, :]
    suffix = np.maximum.accumulate(scaled[:, ::-1], axis=1)[:, ::-1]
    cut = np.searchsorted(norms, radii, side="right")
    inner = np.where(cut > 0, 0, 1)
    pre = prefix[:, np.maximum(cut - 1, 0)]
    pre = np.where(inner[None, :] == 1, 0.0, pre)
    outer = cut < n_fun
    suf = suffix[:, np.minimum(cut, n_fun - 1)] * radii[None, :]
    suf = np.where(outer[None, :], suf, 0.0)
    sup = np.maximum(pre, suf)
    return sup.sum(axis=0), np.square(sup).sum(axis=0)


@njit
def sup_profile_numba(P, norms, radii):
    n_draw, n_fun = P.shape
    n_r = radii.shape[0]
    tot = np.zeros(n_r)
    tot2 = np.zeros(n_r)
    if n_fun == 0:
        return tot, tot2
    cut = np.searchsorted(norms, radii, side="right")
    prefix = np.empty(n_fun)
    suffix = np.empty(n_fun)
    for g in range(n_draw):
        best = 0.0
        for j in range(n_fun):
            if P[g, j] > best:
                best = P[g, j]
            prefix[j] = best
        best = 0.0
        for j in range(n_fun - 1, -1, -1):
            v = P[g, j] / norms[j]
            if v > best:
                best = v
            suffix[j] = best
        for q in range(n_r):
            c = cut[q]
            s = 0.0
            if c > 0:
                s = prefix[c - 1]
            if c < n_fun:
                v = radii[q] * suffix[c]
                if v > s:
                    s = v
            tot[q] += s
            tot2[q] += s * s
    return tot, tot2


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

if USE_NUMBA:
    def mom_columns(Z, k):
        return mom_columns_numba(np.ascontiguousarray(Z, dtype=np.float64), int(k))

    def greedy_centers(Y, sep):
        return greedy_centers_numba(np.ascontiguousarray(Y, dtype=np.float64), float(sep))

    def nearest(Y, C):
        return nearest_numba(np.ascontiguousarray(Y, dtype=np.float64),
                             np.ascontiguousarray(C, dtype=np.float64))

    def minimax(Y):
        return int(minimax_numba(np.ascontiguousarray(Y, dtype=np.float64)))

    def farthest_order(Y, start, m):
        return farthest_order_numba(np.ascontiguousarray(Y, dtype=np.float64), int(start), int(m))

    def sup_profile(P, norms, radii):
        return sup_profile_numba(np.ascontiguousarray(P, dtype=np.float64),
                                 np.ascontiguousarray(norms, dtype=np.float64),
                                 np.ascontiguousarray(radii, dtype=np.float64))
else:
    mom_columns = mom_columns_numpy
    greedy_centers = greedy_centers_numpy
    nearest = nearest_numpy
    minimax = minimax_numpy
    farthest_order = farthest_order_numpy
    sup_profile = sup_profile_numpy
