"""Brute-force double-loop detectors, written straight from the stretch means.

Independent of the package: no partial-sum identities, no centering.
"""

import math


def stretch_mean(x, j, k):
    """Mean of X_j..X_k (1-based, inclusive); 0 if j > k."""
    if j > k:
        return 0.0
    return math.fsum(x[j - 1 : k]) / (k - j + 1)


def weighted_diffs(x, m, k):
    out = []
    for j in range(m, k):
        out.append(j * (k - j) / m**1.5 * (stretch_mean(x, 1, j) - stretch_mean(x, j + 1, k)))
    return out


def R(x, m, k):
    return max(abs(v) for v in weighted_diffs(x, m, k))


def S(x, m, k):
    return math.fsum(abs(v) for v in weighted_diffs(x, m, k)) / m


def T(x, m, k):
    return math.sqrt(math.fsum(v * v for v in weighted_diffs(x, m, k)) / m)


def E(x, m, k):
    return max(
        (k - j) / math.sqrt(m) * abs(stretch_mean(x, 1, j) - stretch_mean(x, j + 1, k))
        for j in range(m, k)
    )


def Q(x, m, k):
    return (k - m) / math.sqrt(m) * abs(stretch_mean(x, 1, m) - stretch_mean(x, m + 1, k))


def change_point(x, m, k):
    vals = [abs(v) for v in weighted_diffs(x, m, k)]
    best = max(vals)
    return m + vals.index(best) + 1


DETECTORS = {"R": R, "S": S, "T": T, "E": E, "Q": Q}
