"""Detectors built on plug-in estimators of a marginal parameter.

``R``, ``S`` and ``T`` with ``mean(X_1..X_j) - mean(X_{j+1}..X_k)`` replaced by
``theta(F_{1:j}) - theta(F_{j+1:k})`` for the mean, the (biased) variance or
a quantile of the empirical distribution function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .detectors import DetectorKind
from .errors import ConfigurationError, DataError
from .lrv import LrvEstimate, long_run_variance


@dataclass(frozen=True)
class Parameter:
    name: str  # "mean", "variance" or "quantile"
    level: float | None = None

    def __post_init__(self) -> None:
        if self.name not in ("mean", "variance", "quantile"):
            raise ConfigurationError(f"unknown parameter {self.name!r}")
        if self.name == "quantile":
            if self.level is None or not 0 < self.level < 1:
                raise ConfigurationError(f"quantile level must lie in (0, 1), got {self.level}")
        elif self.level is not None:
            raise ConfigurationError(f"{self.name} takes no level")

    @classmethod
    def parse(cls, text: str) -> Parameter:
        """``mean``, ``variance`` or ``quantile:p``."""
        name, _, level = text.strip().lower().partition(":")
        if name == "quantile":
            try:
                return cls("quantile", float(level))
            except ValueError:
                raise ConfigurationError(f"bad quantile parameter {text!r}") from None
        if level:
            raise ConfigurationError(f"bad parameter {text!r}")
        return cls(name)

    def __str__(self) -> str:
        return f"quantile:{self.level:g}" if self.name == "quantile" else self.name


MEAN = Parameter("mean")
VARIANCE = Parameter("variance")


def plugin_estimate(param: Parameter, window) -> float:
    x = np.asarray(window, dtype=float)
    if x.size == 0:
        raise DataError("empty window")
    if param.name == "mean":
        return float(np.mean(x))
    if param.name == "variance":
        return float(np.mean((x - x.mean()) ** 2))
    n = x.size
    idx = math.ceil(round(param.level * n, 9))
    return float(np.sort(x)[max(idx, 1) - 1])


class ParamState:
    """Raw observations plus prefix sums of centered ``x`` and ``x**2``."""

    def __init__(self, learning) -> None:
        x = np.asarray(learning, dtype=float)
        if x.ndim != 1 or x.size < 2:
            raise ConfigurationError("learning sample needs at least 2 observations")
        if not np.all(np.isfinite(x)):
            raise DataError("learning sample contains non-finite values")
        self.m = x.size
        self.k = x.size
        self.center = float(np.mean(x))
        self._x = list(x)
        d = x - self.center
        self._p1 = [0.0, *np.cumsum(d)]
        self._p2 = [0.0, *np.cumsum(d * d)]

    @property
    def observations(self) -> np.ndarray:
        return np.asarray(self._x)

    @property
    def prefix1(self) -> np.ndarray:
        return np.asarray(self._p1)

    @property
    def prefix2(self) -> np.ndarray:
        return np.asarray(self._p2)

    def push(self, x: float) -> ParamState:
        x = float(x)
        if not math.isfinite(x):
            raise DataError(f"non-finite observation {x!r}")
        d = x - self.center
        self._x.append(x)
        self._p1.append(self._p1[-1] + d)
        self._p2.append(self._p2[-1] + d * d)
        self.k += 1
        return self

    def differences(self, param: Parameter) -> np.ndarray:
        """``theta_{1:j} - theta_{j+1:k}`` for ``j = m..k-1``."""
        m, k = self.m, self.k
        if k <= m:
            raise ConfigurationError("need k >= m+1")
        js = np.arange(m, k)
        if param.name == "quantile":
            x = self.observations
            return np.array([plugin_estimate(param, x[:j]) - plugin_estimate(param, x[j:k]) for j in js])
        p1 = self.prefix1
        n_left = js.astype(float)
        n_right = (k - js).astype(float)
        mean_l = p1[js] / n_left
        mean_r = (p1[k] - p1[js]) / n_right
        if param.name == "mean":
            return mean_l - mean_r
        p2 = self.prefix2
        var_l = p2[js] / n_left - mean_l**2
        var_r = (p2[k] - p2[js]) / n_right - mean_r**2
        return var_l - var_r


def _weighted(state: ParamState, param: Parameter) -> np.ndarray:
    js = np.arange(state.m, state.k, dtype=float)
    return js * (state.k - js) / state.m**1.5 * state.differences(param)


def param_detector_value(state: ParamState, param: Parameter, kind) -> float:
    kind = DetectorKind.parse(kind)
    v = _weighted(state, param)
    if kind is DetectorKind.R:
        return float(np.max(np.abs(v)))
    if kind is DetectorKind.S:
        return math.fsum(np.abs(v)) / state.m
    if kind is DetectorKind.T:
        return math.sqrt(math.fsum(v * v) / state.m)
    raise ConfigurationError(f"parameter detectors exist for R, S and T, not {kind.value}")


def param_change_point(state: ParamState, param: Parameter) -> int:
    return state.m + int(np.argmax(np.abs(_weighted(state, param)))) + 1


def influence_values(param: Parameter, sample) -> np.ndarray:
    x = np.asarray(sample, dtype=float)
    mu = x.mean()
    if param.name == "mean":
        return x - mu
    if param.name == "variance":
        d2 = (x - mu) ** 2
        return d2 - d2.mean()
    raise ConfigurationError(
        "normalization for quantile parameters needs a density estimate and is not supported; "
        "supply sigma explicitly"
    )


def influence_sigma(param: Parameter, learning) -> LrvEstimate:
    """Long-run variance of the empirical influence values of ``param``."""
    if param.name == "quantile":
        influence_values(param, learning)
    x = np.asarray(learning, dtype=float)
    if param.name == "mean":
        return long_run_variance(x)
    return long_run_variance(influence_values(param, x))
