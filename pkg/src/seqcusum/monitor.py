"""Open-end sequential test: learning sample, sigma, quantile, per-observation decision."""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass
from typing import Iterable

from .detectors import (
    DetectorKind,
    DetectorValue,
    PrefixSumState,
    ThresholdSpec,
    change_point_estimate,
    detector_value,
    threshold_value,
)
from .errors import ConfigurationError, StateError
from .lrv import LrvEstimate, long_run_variance
from .params import MEAN, Parameter, ParamState, influence_sigma, param_change_point, param_detector_value
from .quantiles import QuantileEntry, QuantileTable, default_table

LARGE_ETA_WARNING = 0.05


@dataclass(frozen=True)
class MonitorConfig:
    spec: ThresholdSpec
    alpha: float = 0.05
    quantile: float | None = None  # explicit override of the table
    parameter: Parameter = MEAN
    sigma: float | None = None  # explicit sigma instead of the estimate

    def __post_init__(self) -> None:
        if not 0 < self.alpha < 0.5:
            raise ConfigurationError(f"alpha must lie in (0, 1/2), got {self.alpha}")
        if self.quantile is not None and not self.quantile > 0:
            raise ConfigurationError(f"explicit quantile must be positive, got {self.quantile}")
        if self.sigma is not None and not self.sigma > 0:
            raise ConfigurationError(f"explicit sigma must be positive, got {self.sigma}")
        if self.parameter != MEAN and self.spec.kind not in (DetectorKind.R, DetectorKind.S, DetectorKind.T):
            raise ConfigurationError("parameter detectors exist for R, S and T only")

    @property
    def kind(self) -> DetectorKind:
        return self.spec.kind


@dataclass(frozen=True)
class AlarmReport:
    alarm_index: int
    raw: float
    threshold: float
    normalized: float
    quantile: float
    change_point: int
    consumed: int
    sigma: float


@dataclass(frozen=True)
class NoAlarmSummary:
    max_normalized: float
    max_index: int | None
    consumed: int
    quantile: float
    sigma: float


class Monitor:
    """Single-writer open-end monitor.

    Parameters
    ----------
    config : MonitorConfig
    learning : sequence of float
        The stationary learning sample ``X_1..X_m``.
    table : QuantileTable, optional
        Source of the critical value when ``config.quantile`` is not given.
    """

    def __init__(self, config: MonitorConfig, learning, table: QuantileTable | None = None) -> None:
        learning = [float(v) for v in learning]
        if len(learning) < 4:
            raise ConfigurationError(f"learning sample needs at least 4 observations, got {len(learning)}")
        self.config = config
        spec = config.spec
        if config.quantile is not None:
            self.quantile = QuantileEntry(spec.kind, spec.eta, spec.gamma, config.alpha, config.quantile, 0.0, "shipped")
        else:
            table = table if table is not None else default_table()
            self.quantile = table.lookup(spec.kind, spec.key_eta, spec.gamma, config.alpha)
        if spec.kind.uses_eta and spec.eta >= LARGE_ETA_WARNING:
            warnings.warn(f"eta={spec.eta:g} is large: false alarms early in the monitoring become likely", RuntimeWarning, stacklevel=2)

        self.lrv: LrvEstimate | None = None
        if config.sigma is not None:
            self.sigma = float(config.sigma)
        else:
            self.lrv = long_run_variance(learning) if config.parameter == MEAN else influence_sigma(config.parameter, learning)
            self.sigma = self.lrv.sigma
            if self.lrv.floored:
                warnings.warn("long-run variance estimate was floored", RuntimeWarning, stacklevel=2)
            if not self.sigma > 0:
                raise ConfigurationError("estimated sigma is zero")

        self.m = len(learning)
        if config.parameter == MEAN:
            self.state: PrefixSumState | ParamState = PrefixSumState(learning)
        else:
            self.state = ParamState(learning)
        self.alarm: AlarmReport | None = None
        self._max = (-math.inf, None)

    @property
    def k(self) -> int:
        return self.state.k

    @property
    def alarmed(self) -> bool:
        return self.alarm is not None

    def _raw(self) -> float:
        if self.config.parameter == MEAN:
            return detector_value(self.state, self.config.kind)
        return param_detector_value(self.state, self.config.parameter, self.config.kind)

    def _change_point(self) -> int:
        if self.config.parameter == MEAN:
            return change_point_estimate(self.state)
        return param_change_point(self.state, self.config.parameter)

    def step(self, x: float) -> DetectorValue | AlarmReport:
        """Consume one observation; returns an :class:`AlarmReport` on exceedance."""
        if self.alarm is not None:
            raise StateError(f"monitor already alarmed at k={self.alarm.alarm_index}")
        self.state.push(x)
        k = self.state.k
        raw = self._raw()
        w = threshold_value(self.config.spec, k / self.m)
        value = DetectorValue(k=k, raw=raw, threshold=w, normalized=raw / (self.sigma * w))
        if value.normalized > self._max[0]:
            self._max = (value.normalized, k)
        if value.normalized > self.quantile.quantile:
            self.alarm = AlarmReport(
                alarm_index=k,
                raw=raw,
                threshold=w,
                normalized=value.normalized,
                quantile=self.quantile.quantile,
                change_point=self._change_point(),
                consumed=k - self.m,
                sigma=self.sigma,
            )
            return self.alarm
        return value

    def summary(self) -> NoAlarmSummary:
        best, at = self._max
        return NoAlarmSummary(
            max_normalized=best if at is not None else 0.0,
            max_index=at,
            consumed=self.state.k - self.m,
            quantile=self.quantile.quantile,
            sigma=self.sigma,
        )


def create_monitor(config: MonitorConfig, learning, table: QuantileTable | None = None) -> Monitor:
    return Monitor(config, learning, table)


def run_stream(monitor: Monitor, source: Iterable[float]) -> AlarmReport | NoAlarmSummary:
    """Feed ``source`` until an alarm or exhaustion."""
    for x in source:
        out = monitor.step(x)
        if isinstance(out, AlarmReport):
            return out
    return monitor.summary()


def report_dict(report: AlarmReport | NoAlarmSummary) -> dict:
    """JSON-ready view with the fixed report keys."""
    if isinstance(report, AlarmReport):
        d = {
            "alarm": True,
            "alarm_index": report.alarm_index,
            "change_point": report.change_point,
            "normalized": report.normalized,
            "quantile": report.quantile,
            "sigma": report.sigma,
            "consumed": report.consumed,
        }
        d.update(raw=report.raw, threshold=report.threshold)
        return d
    d = asdict(report)
    return {
        "alarm": False,
        "alarm_index": None,
        "change_point": None,
        "normalized": d["max_normalized"],
        "quantile": d["quantile"],
        "sigma": d["sigma"],
        "consumed": d["consumed"],
        "max_index": d["max_index"],
    }
