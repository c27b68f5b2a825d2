"""Incremental retrospective-CUSUM detectors and their threshold functions.

All five detectors are functions of the centered partial sums
``S_j = sum_{i<=j} (X_i - c)`` through the contrast ``k*S_j - j*S_k``, which
equals ``j*(k-j)*(mean(X_1..X_j) - mean(X_{j+1}..X_k))``.  The state keeps
enough structure to evaluate each of them without rescanning the data:

* ``R``: upper/lower convex hulls of the points ``(j, S_j)``;
* ``E``: running extremes of ``S_j / j``;
* ``T``: the three quadratic accumulators;
* ``Q``: ``S_m`` and ``S_k`` only;
* ``S``: a linear pass over the stored partial sums.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DataError

__all__ = [
    "DetectorKind",
    "ThresholdSpec",
    "DetectorValue",
    "PrefixSumState",
    "init_state",
    "push",
    "detector_value",
    "threshold_value",
    "threshold_values",
    "w_gamma",
    "normalized_detector",
    "change_point_estimate",
]


class DetectorKind(str, enum.Enum):
    R = "R"
    S = "S"
    T = "T"
    E = "E"
    Q = "Q"

    @property
    def base_exponent(self) -> float:
        """Power of ``t`` in the threshold function, excluding ``eta``."""
        return _BASE_EXPONENT[self]

    @property
    def uses_eta(self) -> bool:
        return self in (DetectorKind.R, DetectorKind.S, DetectorKind.T)

    @classmethod
    def parse(cls, value: str | DetectorKind) -> DetectorKind:
        if isinstance(value, DetectorKind):
            return value
        try:
            return cls(str(value).strip().upper())
        except ValueError:
            raise ConfigurationError(f"unknown detector kind {value!r}; expected one of R,S,T,E,Q") from None


_BASE_EXPONENT = {
    DetectorKind.R: 1.5,
    DetectorKind.S: 2.5,
    DetectorKind.T: 2.0,
    DetectorKind.E: 1.0,
    DetectorKind.Q: 1.0,
}


@dataclass(frozen=True)
class ThresholdSpec:
    """Detector kind plus the ``(eta, gamma, epsilon)`` of its threshold function.

    ``eta`` is ignored by ``E`` and ``Q`` (their threshold is ``t * w_gamma(t)``).
    """

    kind: DetectorKind
    eta: float = 0.001
    gamma: float = 0.0
    epsilon: float = 1e-10

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", DetectorKind.parse(self.kind))
        if not (self.epsilon > 0):
            raise ConfigurationError(f"epsilon must be positive, got {self.epsilon}")
        if not (self.eta >= 0):
            raise ConfigurationError(f"eta must be nonnegative, got {self.eta}")
        if not (self.gamma >= 0):
            raise ConfigurationError(f"gamma must be nonnegative, got {self.gamma}")
        if self.eta == 0 and self.kind.uses_eta:
            warnings.warn(
                "eta = 0: the limiting supremum is almost surely infinite, "
                "so the test cannot hold its level in open-end monitoring",
                RuntimeWarning,
                stacklevel=3,
            )

    @property
    def key_eta(self) -> float:
        """``eta`` as used for table lookup (0 for detectors that ignore it)."""
        return self.eta if self.kind.uses_eta else 0.0


@dataclass(frozen=True)
class DetectorValue:
    k: int
    raw: float
    threshold: float
    normalized: float


def w_gamma(t, gamma: float, epsilon: float = 1e-10):
    """``max(((t-1)/t)**gamma, epsilon)``, identically 1 when ``gamma == 0``."""
    if gamma == 0:
        return np.ones_like(t, dtype=float) if isinstance(t, np.ndarray) else 1.0
    return np.maximum(((t - 1.0) / t) ** gamma, epsilon)


def threshold_value(spec: ThresholdSpec, t: float) -> float:
    """Threshold function of ``spec.kind`` evaluated at ``t >= 1``."""
    if not (t >= 1):
        raise ConfigurationError(f"threshold functions are defined for t >= 1, got {t}")
    eta = spec.eta if spec.kind.uses_eta else 0.0
    return float(t ** (spec.kind.base_exponent + eta) * w_gamma(float(t), spec.gamma, spec.epsilon))


def threshold_values(spec: ThresholdSpec, t: np.ndarray) -> np.ndarray:
    """Vectorized :func:`threshold_value`."""
    t = np.asarray(t, dtype=float)
    if t.size and t.min() < 1:
        raise ConfigurationError("threshold functions are defined for t >= 1")
    eta = spec.eta if spec.kind.uses_eta else 0.0
    return t ** (spec.kind.base_exponent + eta) * w_gamma(t, spec.gamma, spec.epsilon)


class PrefixSumState:
    """Single-writer monitoring state over centered partial sums.

    ``prefix[i]`` holds ``S_{m+i}`` for ``i = 0..k-m``.  Hulls and
    accumulators cover the points ``j = m..k-1``.
    """

    def __init__(self, learning) -> None:
        x = np.asarray(learning, dtype=float)
        if x.ndim != 1:
            raise DataError("learning sample must be one-dimensional")
        m = x.size
        if m < 2:
            raise ConfigurationError(f"learning sample needs at least 2 observations, got {m}")
        if not np.all(np.isfinite(x)):
            raise DataError("learning sample contains non-finite values")
        self.m = m
        self.k = m
        self.center = math.fsum(x) / m
        self._sum = math.fsum(x - self.center)
        self._comp = 0.0
        self._buf = np.empty(max(1024, 2 * m), dtype=float)
        self._buf[0] = self._sum
        # hull vertices: parallel lists of j and S_j
        self._ux: list[int] = []
        self._uy: list[float] = []
        self._lx: list[int] = []
        self._ly: list[float] = []
        self._rmax = -math.inf
        self._rmax_j = -1
        self._rmin = math.inf
        self._rmin_j = -1
        self.acc_A = 0.0
        self.acc_B = 0.0
        self.acc_C = 0.0

    @property
    def prefix(self) -> np.ndarray:
        """View of ``S_m..S_k``."""
        return self._buf[: self.k - self.m + 1]

    def S(self, j: int) -> float:
        return float(self._buf[j - self.m])

    @property
    def S_k(self) -> float:
        return float(self._buf[self.k - self.m])

    @property
    def upper_hull(self) -> list[tuple[int, float]]:
        return list(zip(self._ux, self._uy))

    @property
    def lower_hull(self) -> list[tuple[int, float]]:
        return list(zip(self._lx, self._ly))

    def push(self, x: float) -> PrefixSumState:
        x = float(x)
        if not math.isfinite(x):
            raise DataError(f"non-finite observation {x!r}")
        j, s = self.k, self.S_k
        self._insert_point(j, s)
        self.acc_A += s * s
        self.acc_B += j * s
        self.acc_C += float(j) * j
        r = s / j
        if r > self._rmax:
            self._rmax, self._rmax_j = r, j
        if r < self._rmin:
            self._rmin, self._rmin_j = r, j

        # Neumaier-compensated running sum
        v = x - self.center
        t = self._sum + v
        if abs(self._sum) >= abs(v):
            self._comp += (self._sum - t) + v
        else:
            self._comp += (v - t) + self._sum
        self._sum = t

        n = self.k - self.m + 1
        if n >= self._buf.size:
            self._buf = np.concatenate([self._buf, np.empty_like(self._buf)])
        self._buf[n] = self._sum + self._comp
        self.k += 1
        return self

    def _insert_point(self, j: int, s: float) -> None:
        ux, uy = self._ux, self._uy
        while len(ux) >= 2 and _cross(ux[-2], uy[-2], ux[-1], uy[-1], j, s) >= 0:
            ux.pop()
            uy.pop()
        ux.append(j)
        uy.append(s)
        lx, ly = self._lx, self._ly
        while len(lx) >= 2 and _cross(lx[-2], ly[-2], lx[-1], ly[-1], j, s) <= 0:
            lx.pop()
            ly.pop()
        lx.append(j)
        ly.append(s)

    def _hull_argmax(self, a: float) -> int:
        """``j`` maximizing ``S_j - a*j`` over the upper hull."""
        xs, ys = self._ux, self._uy
        lo, hi = 0, len(xs) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            # edge mid->mid+1 still rising under the tilted objective
            if ys[mid + 1] - ys[mid] > a * (xs[mid + 1] - xs[mid]):
                lo = mid + 1
            else:
                hi = mid
        return xs[lo]

    def _hull_argmin(self, a: float) -> int:
        """``j`` minimizing ``S_j - a*j`` over the lower hull."""
        xs, ys = self._lx, self._ly
        lo, hi = 0, len(xs) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if ys[mid + 1] - ys[mid] < a * (xs[mid + 1] - xs[mid]):
                lo = mid + 1
            else:
                hi = mid
        return xs[lo]

    def contrasts(self) -> np.ndarray:
        """``k*S_j - j*S_k`` for ``j = m..k-1``."""
        S = self.prefix
        js = np.arange(self.m, self.k, dtype=float)
        return self.k * S[:-1] - js * S[-1]

    def rebuild_accumulators(self) -> tuple[float, float, float]:
        S = self.prefix[:-1]
        js = np.arange(self.m, self.k, dtype=float)
        return math.fsum(S * S), math.fsum(js * S), math.fsum(js * js)


def _cross(ox, oy, ax, ay, bx, by) -> float:
    return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox)


def init_state(learning) -> PrefixSumState:
    return PrefixSumState(learning)


def push(state: PrefixSumState, x: float) -> PrefixSumState:
    return state.push(x)


def _require_monitoring(state: PrefixSumState) -> None:
    if state.k <= state.m:
        raise ConfigurationError("detectors need at least one monitoring observation (k >= m+1)")


def detector_value(state: PrefixSumState, kind: DetectorKind | str, scan: bool = False) -> float:
    """Raw detector value at the current ``k``.

    ``scan=True`` evaluates ``R`` and ``E`` by a linear pass instead of the
    hull / running-extreme shortcuts.
    """
    kind = DetectorKind.parse(kind)
    _require_monitoring(state)
    m, k, Sk = state.m, state.k, state.S_k
    m15 = m**1.5
    if kind is DetectorKind.R:
        if scan:
            return float(np.max(np.abs(state.contrasts()))) / m15
        a = Sk / k
        jmax = state._hull_argmax(a)
        jmin = state._hull_argmin(a)
        v1 = abs(k * state.S(jmax) - jmax * Sk)
        v2 = abs(k * state.S(jmin) - jmin * Sk)
        return max(v1, v2) / m15
    if kind is DetectorKind.E:
        if scan:
            js = np.arange(m, k, dtype=float)
            return float(np.max(np.abs(state.contrasts()) / js)) / math.sqrt(m)
        v = 0.0
        for j in (state._rmax_j, state._rmin_j):
            v = max(v, abs(k * state.S(j) - j * Sk) / j)
        return v / math.sqrt(m)
    if kind is DetectorKind.Q:
        return abs(k * state.S(m) - m * Sk) / m / math.sqrt(m)
    if kind is DetectorKind.S:
        return math.fsum(np.abs(state.contrasts())) / (m * m15)
    # T
    q = k * k * state.acc_A - 2.0 * k * Sk * state.acc_B + Sk * Sk * state.acc_C
    return math.sqrt(max(q, 0.0) / m**4)


def normalized_detector(
    state: PrefixSumState,
    kind: DetectorKind | str,
    spec: ThresholdSpec,
    sigma: float,
) -> DetectorValue:
    kind = DetectorKind.parse(kind)
    if spec.kind is not kind:
        raise ConfigurationError(f"threshold spec is for {spec.kind.value}, not {kind.value}")
    if not (sigma > 0):
        raise ConfigurationError(f"sigma must be positive, got {sigma}")
    raw = detector_value(state, kind)
    w = threshold_value(spec, state.k / state.m)
    return DetectorValue(k=state.k, raw=raw, threshold=w, normalized=raw / (sigma * w))


def change_point_estimate(state: PrefixSumState) -> int:
    """``argmax_j |k*S_j - j*S_k| + 1`` over ``j = m..k-1``; smallest ``j`` on ties."""
    _require_monitoring(state)
    return state.m + int(np.argmax(np.abs(state.contrasts()))) + 1
