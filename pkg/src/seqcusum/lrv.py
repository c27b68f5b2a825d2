"""Long-run variance via the quadratic-spectral kernel with AR(1) plug-in bandwidth."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DataError

RHO_CLAMP = 0.97
MIN_BANDWIDTH = 0.01
FLOOR_FRACTION = 1e-3


@dataclass(frozen=True)
class LrvEstimate:
    sigma2: float
    sigma: float
    bandwidth: float
    m: int
    floored: bool = False


def _as_sample(sample) -> np.ndarray:
    x = np.asarray(sample, dtype=float)
    if x.ndim != 1:
        raise DataError("sample must be one-dimensional")
    if not np.all(np.isfinite(x)):
        raise DataError("sample contains non-finite values")
    return x


def autocovariances(sample) -> np.ndarray:
    """Biased autocovariances (divisor ``m``) at lags ``0..m-1``, via FFT."""
    x = _as_sample(sample)
    m = x.size
    d = x - x.mean()
    nfft = 1 << (2 * m - 1).bit_length()
    f = np.fft.rfft(d, nfft)
    acov = np.fft.irfft(f * np.conj(f), nfft)[:m] / m
    return acov


def autocovariance(sample, lag: int) -> float:
    x = _as_sample(sample)
    m = x.size
    if not (0 <= lag < m):
        raise ConfigurationError(f"lag must lie in [0, {m - 1}], got {lag}")
    d = x - x.mean()
    return float(np.dot(d[: m - lag], d[lag:]) / m)


def qs_kernel(x):
    """Quadratic-spectral kernel, ``k(0) = 1``."""
    x = np.asarray(x, dtype=float)
    z = 6.0 * np.pi * x / 5.0
    with np.errstate(divide="ignore", invalid="ignore"):
        val = 25.0 / (12.0 * np.pi**2 * x**2) * (np.sin(z) / z - np.cos(z))
    val = np.where(x == 0, 1.0, val)
    return float(val) if val.ndim == 0 else val


def _check_sample(x: np.ndarray) -> None:
    if x.size < 4:
        raise ConfigurationError(f"long-run variance needs at least 4 observations, got {x.size}")


def bandwidth_from_rho(rho: float, m: int) -> float:
    rho = min(max(rho, -RHO_CLAMP), RHO_CLAMP)
    alpha2 = 4.0 * rho**2 / (1.0 - rho) ** 4
    return float(max(1.3221 * (alpha2 * m) ** 0.2, MIN_BANDWIDTH))


def andrews_bandwidth(sample) -> float:
    x = _as_sample(sample)
    _check_sample(x)
    acov = autocovariances(x)
    if not acov[0] > 0:
        raise DataError("sample has zero variance")
    return bandwidth_from_rho(float(acov[1] / acov[0]), x.size)


def long_run_variance(sample) -> LrvEstimate:
    x = _as_sample(sample)
    _check_sample(x)
    m = x.size
    acov = autocovariances(x)
    g0 = float(np.dot(x - x.mean(), x - x.mean()) / m)
    if not g0 > 0 or g0 <= 1e-28 * max(1.0, float(np.mean(x * x))):
        raise DataError("sample has zero variance; long-run variance is undefined")
    bw = bandwidth_from_rho(float(acov[1] / acov[0]), m)
    lags = np.arange(1, m)
    s2 = g0 + 2.0 * float(np.dot(qs_kernel(lags / bw), acov[1:]))
    floored = False
    if not s2 > 0:
        s2 = g0 * FLOOR_FRACTION
        floored = True
    return LrvEstimate(sigma2=s2, sigma=math.sqrt(s2), bandwidth=bw, m=m, floored=floored)
