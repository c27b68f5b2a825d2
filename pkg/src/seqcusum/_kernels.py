"""Compiled whole-path detector evaluation.

Used where the full series is known in advance (quantile calibration, the
simulation harness).  ``S`` is evaluated in ``O(log n)`` per step with two
Fenwick trees indexed by the rank of ``S_j / j``: the sign of ``k*S_j - j*S_k``
is the sign of ``S_j/j - S_k/k``.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# row order of the array returned by raw_detector_paths
KIND_ROWS = {"R": 0, "S": 1, "T": 2, "E": 3, "Q": 4}


@njit(cache=True)
def _fenwick_add(tree, i, v):
    n = tree.shape[0]
    i += 1
    while i <= n:
        tree[i - 1] += v
        i += i & (-i)


@njit(cache=True)
def _fenwick_prefix(tree, i):
    # sum of entries [0, i)
    s = 0.0
    while i > 0:
        s += tree[i - 1]
        i -= i & (-i)
    return s


@njit(cache=True)
def _centered_prefix(x, m):
    n = x.shape[0]
    c = 0.0
    for i in range(m):
        c += x[i]
    c /= m
    S = np.empty(n + 1)
    S[0] = 0.0
    s = 0.0
    comp = 0.0
    for i in range(n):
        v = x[i] - c
        t = s + v
        if abs(s) >= abs(v):
            comp += (s - t) + v
        else:
            comp += (v - t) + s
        s = t
        S[i + 1] = s + comp
    return S


@njit(cache=True)
def raw_detector_paths(x, m, want_s):
    """Raw R, S, T, E, Q for ``k = m+1..n``; row order as ``KIND_ROWS``.

    ``want_s=False`` skips the ``S`` row (left as zeros).
    """
    n = x.shape[0]
    S = _centered_prefix(x, m)
    nk = n - m
    out = np.zeros((5, nk))
    m15 = m**1.5
    sqm = np.sqrt(m)

    # ranks of S_j / j for j = m..n-1
    npts = n - m
    ratio = np.empty(npts)
    for i in range(npts):
        j = m + i
        ratio[i] = S[j] / j
    order = np.argsort(ratio)
    sorted_r = ratio[order]
    rank = np.empty(npts, dtype=np.int64)
    for pos in range(npts):
        rank[order[pos]] = pos
    fs = np.zeros(npts)
    fj = np.zeros(npts)
    tot_s = 0.0
    tot_j = 0.0

    ux = np.empty(npts, dtype=np.int64)
    uy = np.empty(npts)
    lx = np.empty(npts, dtype=np.int64)
    ly = np.empty(npts)
    nu = 0
    nl = 0
    acc_a = 0.0
    acc_b = 0.0
    acc_c = 0.0
    rmax = -np.inf
    rmax_j = -1
    rmin = np.inf
    rmin_j = -1

    for k in range(m + 1, n + 1):
        j = k - 1
        sj = S[j]
        # upper hull
        while nu >= 2 and (ux[nu - 1] - ux[nu - 2]) * (sj - uy[nu - 2]) - (uy[nu - 1] - uy[nu - 2]) * (j - ux[nu - 2]) >= 0:
            nu -= 1
        ux[nu] = j
        uy[nu] = sj
        nu += 1
        while nl >= 2 and (lx[nl - 1] - lx[nl - 2]) * (sj - ly[nl - 2]) - (ly[nl - 1] - ly[nl - 2]) * (j - lx[nl - 2]) <= 0:
            nl -= 1
        lx[nl] = j
        ly[nl] = sj
        nl += 1
        acc_a += sj * sj
        acc_b += j * sj
        acc_c += float(j) * j
        r = sj / j
        if r > rmax:
            rmax = r
            rmax_j = j
        if r < rmin:
            rmin = r
            rmin_j = j

        sk = S[k]
        a = sk / k
        col = k - m - 1

        # R
        lo = 0
        hi = nu - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if uy[mid + 1] - uy[mid] > a * (ux[mid + 1] - ux[mid]):
                lo = mid + 1
            else:
                hi = mid
        ja = ux[lo]
        v1 = abs(k * S[ja] - ja * sk)
        lo = 0
        hi = nl - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if ly[mid + 1] - ly[mid] < a * (lx[mid + 1] - lx[mid]):
                lo = mid + 1
            else:
                hi = mid
        jb = lx[lo]
        v2 = abs(k * S[jb] - jb * sk)
        out[0, col] = max(v1, v2) / m15

        # S
        if want_s:
            p = rank[j - m]
            _fenwick_add(fs, p, sj)
            _fenwick_add(fj, p, float(j))
            tot_s += sj
            tot_j += j
            cut = np.searchsorted(sorted_r, a, side="right")
            low_s = _fenwick_prefix(fs, cut)
            low_j = _fenwick_prefix(fj, cut)
            high_s = tot_s - low_s
            high_j = tot_j - low_j
            val = k * (high_s - low_s) - sk * (high_j - low_j)
            out[1, col] = abs(val) / (m * m15)

        # T
        q = k * k * acc_a - 2.0 * k * sk * acc_b + sk * sk * acc_c
        if q < 0.0:
            q = 0.0
        out[2, col] = np.sqrt(q) / (m * m)

        # E
        e1 = abs(k * S[rmax_j] - rmax_j * sk) / rmax_j
        e2 = abs(k * S[rmin_j] - rmin_j * sk) / rmin_j
        out[3, col] = max(e1, e2) / sqm

        # Q
        out[4, col] = abs(k * S[m] - m * sk) / m / sqm
    return out


@njit(cache=True)
def change_point_from_series(x, m, k):
    """argmax_{m<=j<=k-1} |k*S_j - j*S_k| + 1 on the first ``k`` observations."""
    S = _centered_prefix(x[:k], m)
    best = -1.0
    best_j = m
    sk = S[k]
    for j in range(m, k):
        v = abs(k * S[j] - j * sk)
        if v > best:
            best = v
            best_j = j
    return best_j + 1
