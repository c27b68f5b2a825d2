"""Monte Carlo estimation of limiting quantiles.

R, S and T: simulate finite-``m`` detector paths from iid N(0, 1) data, take
per-horizon empirical quantiles of the running supremum at ``k = m + 2**p``
and extrapolate with the asymptotic regression model
``f(p) = c + (d - c) * (1 - exp(-p / e))``; the upper asymptote ``d`` is the
quantile estimate.

E and Q: simulate Brownian motion on a grid of [0, 1] and take the empirical
quantile of the unit-interval functional directly.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from ._kernels import KIND_ROWS, raw_detector_paths
from .detectors import DetectorKind, ThresholdSpec, threshold_values
from .errors import CalibrationError, ConfigurationError
from .quantiles import QuantileEntry

N_BATCHES = 10


@dataclass(frozen=True)
class CalibrationConfig:
    m_sim: int = 100
    n_paths: int = 4000
    p_min: int = 10
    p_max: int = 14
    seed: int = 20210611
    workers: int = 1

    def __post_init__(self) -> None:
        if not (2 <= self.p_min < self.p_max <= 30):
            raise ConfigurationError("need 2 <= p_min < p_max <= 30")
        if self.n_paths < 100:
            raise ConfigurationError("need at least 100 paths")
        if self.m_sim < 2:
            raise ConfigurationError("m_sim must be at least 2")

    @property
    def powers(self) -> np.ndarray:
        return np.arange(self.p_min, self.p_max + 1)

    @classmethod
    def full_scale(cls, **kw) -> CalibrationConfig:
        """Settings behind the reference quantile table (hours of CPU)."""
        return cls(m_sim=500, n_paths=15000, p_min=10, p_max=18, **kw)


@dataclass(frozen=True)
class RegressionFit:
    c: float
    d: float
    e: float
    residual_norm: float
    converged: bool
    flag: str = ""

    @property
    def quantile(self) -> float:
        return self.d

    def predict(self, x):
        return self.c + (self.d - self.c) * (1.0 - np.exp(-np.asarray(x, dtype=float) / self.e))


def path_rng(seed: int, path_index: int) -> np.random.Generator:
    """Per-path generator; depends only on ``(seed, path_index)``."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(path_index,)))


def _check_specs(specs) -> list[ThresholdSpec]:
    specs = list(specs)
    for s in specs:
        if not s.kind.uses_eta:
            raise ConfigurationError("path calibration covers R, S and T; use brownian_quantile_unit_interval for E and Q")
    return specs


def _sup_block(config: CalibrationConfig, specs: list[ThresholdSpec], start: int, stop: int) -> np.ndarray:
    m = config.m_sim
    steps = 2**config.p_max
    t = np.arange(m + 1, m + steps + 1) / m
    weights = [1.0 / threshold_values(s, t) for s in specs]
    rows = [KIND_ROWS[s.kind.value] for s in specs]
    want_s = any(s.kind is DetectorKind.S for s in specs)
    cols = 2**config.powers - 1
    out = np.empty((stop - start, len(specs), cols.size))
    for i, idx in enumerate(range(start, stop)):
        x = path_rng(config.seed, idx).standard_normal(m + steps)
        raw = raw_detector_paths(x, m, want_s)
        for s_i, (row, w) in enumerate(zip(rows, weights)):
            running = np.maximum.accumulate(raw[row] * w)
            out[i, s_i] = running[cols]
    return out


def simulate_sups(config: CalibrationConfig, specs) -> np.ndarray:
    """Running-sup checkpoints, shape ``(n_paths, len(specs), n_powers)``.

    Paths are split into contiguous index blocks; results are concatenated in
    index order, so the output does not depend on ``config.workers``.
    """
    specs = _check_specs(specs)
    n = config.n_paths
    if config.workers <= 1:
        return _sup_block(config, specs, 0, n)
    n_blocks = config.workers * 4
    bounds = np.linspace(0, n, n_blocks + 1).astype(int)
    with ProcessPoolExecutor(config.workers) as pool:
        futures = [pool.submit(_sup_block, config, specs, int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
        return np.concatenate([f.result() for f in futures])


def simulate_normalized_sup_path(config: CalibrationConfig, spec: ThresholdSpec, path_seed: int) -> dict[int, float]:
    """Running sup of the normalized detector at each checkpoint ``m + 2**p``."""
    sups = _sup_block(config, _check_specs([spec]), path_seed, path_seed + 1)[0, 0]
    return {int(p): float(v) for p, v in zip(config.powers, sups)}


def order_statistic_index(alpha: float, n: int) -> int:
    """1-based index ``ceil((1 - alpha) * n)``, robust to binary rounding."""
    return max(1, min(n, math.ceil(round((1.0 - alpha) * n, 9))))


def empirical_quantile(values, alpha: float) -> float:
    v = np.sort(np.asarray(values, dtype=float))
    return float(v[order_statistic_index(alpha, v.size) - 1])


def empirical_quantiles(sups, alpha: float, powers=None) -> list[tuple[int, float]]:
    """Per-checkpoint upper order statistics of the path suprema.

    ``sups`` has shape ``(n_paths, n_powers)``.
    """
    sups = np.asarray(sups, dtype=float)
    if sups.ndim == 1:
        sups = sups[:, None]
    if sups.shape[0] < 100:
        raise CalibrationError(f"need at least 100 paths, got {sups.shape[0]}")
    if powers is None:
        powers = range(sups.shape[1])
    idx = order_statistic_index(alpha, sups.shape[0]) - 1
    srt = np.sort(sups, axis=0)
    return [(int(p), float(srt[idx, i])) for i, p in enumerate(powers)]


def fit_asymptotic_regression(points) -> RegressionFit:
    """Least-squares fit of ``c + (d - c) * (1 - exp(-x / e))`` by Levenberg-Marquardt."""
    pts = sorted((float(x), float(y)) for x, y in points)
    if len(pts) < 4:
        raise CalibrationError("asymptotic regression needs at least 4 points")
    x = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    span = x[-1] - x[0]
    scale = max(abs(y).max(), 1e-300)
    if y.max() - y.min() <= 1e-12 * scale:
        level = float(y.mean())
        return RegressionFit(level, level, span / 3.0, 0.0, True, "flat")

    # same curve anchored at x0 = x[0]: f = d - (d - b) * exp(-(x - x0) / e),
    # with b = f(x0); far better conditioned than (c, d, e) when x0 >> e
    x0 = x[0]

    def resid(theta):
        b, d, e = theta
        return d - (d - b) * np.exp(-(x - x0) / e) - y

    theta0 = np.array([y[0], y[-1] + (y[-1] - y[0]) * 0.1, span / 3.0])
    try:
        res = least_squares(resid, theta0, method="lm", xtol=1e-12, ftol=1e-15, gtol=1e-15, max_nfev=2000)
        b, d, e = (float(v) for v in res.x)
        ok = res.status > 0 and math.isfinite(d) and e > 0 and e < 1e3 * max(span, 1.0)
        with np.errstate(over="ignore"):
            c = d - (d - b) * math.exp(min(x0 / e, 700.0)) if ok else math.nan
        rnorm = float(np.sqrt(np.mean(res.fun**2)))
    except (ValueError, FloatingPointError, OverflowError):
        ok, c, d, e, rnorm = False, math.nan, math.nan, math.nan, math.inf
    if not ok:
        top = float(y.max())
        return RegressionFit(float(y[0]), top, e, rnorm, False, "asymptote-unresolved")
    return RegressionFit(c, d, e, rnorm, True)


def _estimate(sups: np.ndarray, alpha: float, powers) -> tuple[float, RegressionFit]:
    fit = fit_asymptotic_regression(empirical_quantiles(sups, alpha, powers))
    return fit.quantile, fit


@dataclass
class CalibrationResult:
    entries: list[QuantileEntry]
    per_power: dict = field(default_factory=dict)
    fits: dict = field(default_factory=dict)


def calibrate_many(specs, alphas, config: CalibrationConfig | None = None) -> CalibrationResult:
    """Calibrate several threshold specs from one shared set of simulated paths."""
    config = config or CalibrationConfig()
    specs = _check_specs(specs)
    alphas = sorted(set(float(a) for a in alphas))
    for a in alphas:
        if not 0 < a < 0.5:
            raise ConfigurationError(f"alpha must lie in (0, 0.5), got {a}")
    if config.n_paths // N_BATCHES < 100:
        raise ConfigurationError(f"n_paths must be at least {100 * N_BATCHES} for batch standard errors")
    sups = simulate_sups(config, specs)
    powers = config.powers
    batches = np.array_split(np.arange(config.n_paths), N_BATCHES)
    result = CalibrationResult(entries=[])
    for s_i, spec in enumerate(specs):
        for a in alphas:
            cube = sups[:, s_i, :]
            q, fit = _estimate(cube, a, powers)
            batch_q = [_estimate(cube[b], a, powers)[0] for b in batches]
            se = float(np.std(batch_q, ddof=1) / math.sqrt(N_BATCHES))
            result.entries.append(QuantileEntry(spec.kind, spec.eta, spec.gamma, a, q, se, "simulated"))
            key = (spec.kind.value, spec.eta, spec.gamma, a)
            result.per_power[key] = empirical_quantiles(cube, a, powers)
            result.fits[key] = fit
    return result


def calibrate(spec: ThresholdSpec, alphas=(0.01, 0.05, 0.1), config: CalibrationConfig | None = None) -> list[QuantileEntry]:
    return calibrate_many([spec], alphas, config).entries


def brownian_functional_sample(
    kind, gamma: float, grid_size: int, n_paths: int, seed: int, absolute: bool = False, chunk: int = 1000
) -> np.ndarray:
    """Suprema of the unit-interval Brownian functionals for E and Q.

    Q: ``sup_t W(t) / t**gamma``.  E: ``sup_{s<=t} (W(t) - W(s)) / t**gamma``.
    With ``absolute=True`` the increments enter in absolute value, matching the
    two-sided detectors.
    """
    kind = DetectorKind.parse(kind)
    if kind not in (DetectorKind.E, DetectorKind.Q):
        raise ConfigurationError("unit-interval quantiles exist for E and Q only")
    if not 0 <= gamma < 0.5:
        raise ConfigurationError(f"gamma must lie in [0, 1/2), got {gamma}")
    if grid_size < 2**10:
        raise ConfigurationError("grid_size must be at least 2**10")
    t = np.arange(1, grid_size + 1) / grid_size
    denom = t**gamma
    sd = math.sqrt(1.0 / grid_size)
    out = np.empty(n_paths)
    for b, start in enumerate(range(0, n_paths, chunk)):
        stop = min(start + chunk, n_paths)
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(b,)))
        W = np.cumsum(rng.standard_normal((stop - start, grid_size)) * sd, axis=1)
        if kind is DetectorKind.Q:
            stat = np.abs(W) if absolute else W
        else:
            low = np.minimum(np.minimum.accumulate(W, axis=1), 0.0)
            stat = W - low
            if absolute:
                high = np.maximum(np.maximum.accumulate(W, axis=1), 0.0)
                stat = np.maximum(stat, high - W)
        out[start:stop] = np.maximum((stat / denom).max(axis=1), 0.0)
    return out


def brownian_quantile_unit_interval(
    kind,
    gamma: float = 0.0,
    alpha: float = 0.05,
    grid_size: int = 2**13,
    n_paths: int = 100_000,
    seed: int = 0,
    absolute: bool = False,
) -> QuantileEntry:
    """Empirical ``(1-alpha)``-quantile of the E/Q limiting functional on a grid.

    The standard error comes from 10 disjoint batches of paths.
    """
    if not 0 < alpha < 1:
        raise ConfigurationError(f"alpha must lie in (0, 1), got {alpha}")
    vals = brownian_functional_sample(kind, gamma, grid_size, n_paths, seed, absolute)
    q = empirical_quantile(vals, alpha)
    batch = [empirical_quantile(b, alpha) for b in np.array_split(vals, N_BATCHES)]
    se = float(np.std(batch, ddof=1) / math.sqrt(N_BATCHES))
    return QuantileEntry(DetectorKind.parse(kind), 0.0, gamma, alpha, q, se, "simulated")
