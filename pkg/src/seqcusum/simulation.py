"""Data-generating models and replicated level / power experiments."""

from __future__ import annotations

import csv
import enum
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from ._kernels import KIND_ROWS, raw_detector_paths
from .detectors import DetectorKind, ThresholdSpec, threshold_values
from .errors import ConfigurationError
from .lrv import long_run_variance
from .quantiles import QuantileTable, default_table

BURN_IN = 100

GARCH_OMEGA = 0.012
GARCH_BETA = 0.919
GARCH_ALPHA = 0.072


class ModelId(str, enum.Enum):
    M1 = "M1"
    M2 = "M2"
    M3 = "M3"
    M4 = "M4"
    M5 = "M5"
    M6 = "M6"
    M7 = "M7"
    M8 = "M8"
    M9 = "M9"
    M10 = "M10"

    @classmethod
    def parse(cls, value) -> ModelId:
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().upper())
        except ValueError:
            raise ConfigurationError(f"unknown model {value!r}; expected M1..M10") from None


AR_COEF = {ModelId.M1: 0.0, ModelId.M2: 0.1, ModelId.M3: 0.3, ModelId.M4: 0.5, ModelId.M5: 0.7}


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def generate(model, n: int, seed=None, burn_in: int = BURN_IN) -> np.ndarray:
    """Draw ``n`` observations from one of the ten models.

    Time-series models start from ``X_0 = 0`` (GARCH: stationary variance)
    and discard the first ``burn_in`` values.
    """
    model = ModelId.parse(model)
    if n < 1:
        raise ConfigurationError(f"n must be positive, got {n}")
    rng = _rng(seed)
    if model is ModelId.M6:
        return rng.standard_t(5, size=n)
    if model is ModelId.M10:
        return rng.poisson(3.0, size=n).astype(float)
    total = n + burn_in
    eps = rng.standard_normal(total)
    if model in AR_COEF:
        x = lfilter([1.0], [1.0, -AR_COEF[model]], eps)
    elif model is ModelId.M7:
        x = np.empty(total)
        s2 = GARCH_OMEGA / (1.0 - GARCH_BETA - GARCH_ALPHA)
        prev = 0.0
        for i in range(total):
            if i:
                s2 = GARCH_OMEGA + GARCH_BETA * s2 + GARCH_ALPHA * prev * prev
            prev = math.sqrt(s2) * eps[i]
            x[i] = prev
    elif model is ModelId.M8:
        x = np.empty(total)
        prev = 0.0
        for i in range(total):
            prev = 0.6 * math.sin(prev) + eps[i]
            x[i] = prev
    else:  # M9
        x = np.empty(total)
        prev = 0.0
        for i in range(total):
            prev = (0.8 - 1.1 * math.exp(-50.0 * prev * prev)) * prev + 0.1 * eps[i]
            x[i] = prev
    return np.asarray(x[burn_in:], dtype=float)


@dataclass(frozen=True)
class ShiftSpec:
    k_star: int
    delta: float


def inject_shift(series, shift: ShiftSpec) -> np.ndarray:
    """Add ``delta`` to observations ``k_star+1, k_star+2, ...`` (1-based)."""
    x = np.array(series, dtype=float)
    if not 0 <= shift.k_star < x.size:
        raise ConfigurationError(f"k_star={shift.k_star} must lie in [0, {x.size - 1}]")
    x[shift.k_star :] += shift.delta
    return x


@dataclass(frozen=True)
class DetectorCell:
    kind: DetectorKind
    eta: float = 0.001
    gamma: float = 0.0
    alpha: float = 0.05

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", DetectorKind.parse(self.kind))
        if not self.kind.uses_eta:
            object.__setattr__(self, "eta", 0.0)

    @property
    def spec(self) -> ThresholdSpec:
        return ThresholdSpec(self.kind, self.eta, self.gamma)

    @classmethod
    def parse(cls, text: str) -> DetectorCell:
        """``kind:eta:gamma:alpha``; trailing fields may be omitted."""
        parts = [p for p in text.strip().split(":")]
        if not parts or not parts[0]:
            raise ConfigurationError(f"bad detector cell {text!r}")
        try:
            nums = [float(p) for p in parts[1:]]
        except ValueError:
            raise ConfigurationError(f"bad detector cell {text!r}") from None
        defaults = [0.001, 0.0, 0.05]
        if len(nums) > 3:
            raise ConfigurationError(f"bad detector cell {text!r}")
        vals = nums + defaults[len(nums) :]
        return cls(DetectorKind.parse(parts[0]), *vals)


@dataclass
class ExperimentConfig:
    model: ModelId
    m: int
    n: int
    shift: ShiftSpec | None = None
    detectors: list[DetectorCell] = field(default_factory=list)
    replications: int = 1000
    seed: int = 1
    quantile_override: float | None = None
    workers: int = 1

    def __post_init__(self) -> None:
        self.model = ModelId.parse(self.model)
        self.detectors = [d if isinstance(d, DetectorCell) else DetectorCell.parse(d) for d in self.detectors]
        if self.m < 4:
            raise ConfigurationError("m must be at least 4")
        if self.n <= self.m:
            raise ConfigurationError(f"horizon n={self.n} must exceed m={self.m}")
        if self.replications < 1:
            raise ConfigurationError("replications must be at least 1")
        if not self.detectors:
            raise ConfigurationError("no detectors requested")
        if self.shift is not None and not self.m <= self.shift.k_star < self.n:
            raise ConfigurationError(f"k_star must lie in [m, n-1], got {self.shift.k_star}")


@dataclass(frozen=True)
class CellResult:
    cell: DetectorCell
    quantile: float
    rejection_pct: float
    mean_delay: float
    alarms: int
    replications: int


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    cells: list[CellResult]
    alarm_index: np.ndarray  # (replications, cells); 0 where no alarm

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["kind", "eta", "gamma", "alpha", "rejection_pct", "mean_delay"])
        for c in self.cells:
            delay = "" if math.isnan(c.mean_delay) else format(c.mean_delay, ".6g")
            w.writerow([c.cell.kind.value, format(c.cell.eta, "g"), format(c.cell.gamma, "g"), format(c.cell.alpha, "g"), format(c.rejection_pct, ".6g"), delay])
        return buf.getvalue()

    def rejection_at(self, horizon: int) -> list[float]:
        """Rejection percentages had monitoring stopped at ``horizon``."""
        a = self.alarm_index
        return [100.0 * float(np.mean((a[:, i] > 0) & (a[:, i] <= horizon))) for i in range(a.shape[1])]


def replication_rng(seed: int, rep: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(rep,)))


def _resolve_quantiles(config: ExperimentConfig, table: QuantileTable | None) -> list[float]:
    if config.quantile_override is not None:
        return [float(config.quantile_override)] * len(config.detectors)
    table = table if table is not None else default_table()
    return [table.lookup(c.kind, c.eta, c.gamma, c.alpha).quantile for c in config.detectors]


def first_alarms(x: np.ndarray, m: int, cells, quantiles, sigma: float) -> list[int]:
    """First ``k`` whose normalized detector strictly exceeds its quantile; 0 if none."""
    n = x.size
    want_s = any(c.kind is DetectorKind.S for c in cells)
    raw = raw_detector_paths(np.ascontiguousarray(x, dtype=float), m, want_s)
    t = np.arange(m + 1, n + 1) / m
    out = []
    for c, q in zip(cells, quantiles):
        norm = raw[KIND_ROWS[c.kind.value]] / (sigma * threshold_values(c.spec, t))
        hit = np.flatnonzero(norm > q)
        out.append(int(m + 1 + hit[0]) if hit.size else 0)
    return out


def _run_block(config: ExperimentConfig, quantiles: list[float], start: int, stop: int) -> np.ndarray:
    out = np.zeros((stop - start, len(config.detectors)), dtype=np.int64)
    for i, rep in enumerate(range(start, stop)):
        x = generate(config.model, config.n, replication_rng(config.seed, rep))
        if config.shift is not None and config.shift.delta != 0:
            x = inject_shift(x, config.shift)
        sigma = long_run_variance(x[: config.m]).sigma
        out[i] = first_alarms(x, config.m, config.detectors, quantiles, sigma)
    return out


def run_experiment(config: ExperimentConfig, table: QuantileTable | None = None) -> ExperimentResult:
    quantiles = _resolve_quantiles(config, table)
    reps = config.replications
    if config.workers <= 1:
        alarms = _run_block(config, quantiles, 0, reps)
    else:
        bounds = np.linspace(0, reps, config.workers * 4 + 1).astype(int)
        with ProcessPoolExecutor(config.workers) as pool:
            futs = [pool.submit(_run_block, config, quantiles, int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
            alarms = np.concatenate([f.result() for f in futs])
    cells = []
    for i, (c, q) in enumerate(zip(config.detectors, quantiles)):
        hit = alarms[:, i] > 0
        delay = math.nan
        if config.shift is not None and hit.any():
            delay = float(np.mean(alarms[hit, i] - config.shift.k_star))
        cells.append(CellResult(c, q, 100.0 * float(hit.mean()), delay, int(hit.sum()), reps))
    return ExperimentResult(config, cells, alarms)


def run_level_experiment(config: ExperimentConfig, table: QuantileTable | None = None) -> ExperimentResult:
    if config.shift is not None and config.shift.delta != 0:
        raise ConfigurationError("level experiments run without a shift")
    return run_experiment(config, table)


def run_power_experiment(config: ExperimentConfig, table: QuantileTable | None = None) -> ExperimentResult:
    if config.shift is None:
        raise ConfigurationError("power experiments need a shift (k_star, delta)")
    return run_experiment(config, table)
