"""Open-end sequential change-point detection with retrospective-CUSUM detectors."""

from .detectors import (
    DetectorKind,
    DetectorValue,
    PrefixSumState,
    ThresholdSpec,
    change_point_estimate,
    detector_value,
    init_state,
    normalized_detector,
    push,
    threshold_value,
)
from .errors import CalibrationError, ConfigurationError, DataError, SeqCusumError, StateError, TableError
from .lrv import LrvEstimate, long_run_variance
from .monitor import AlarmReport, Monitor, MonitorConfig, NoAlarmSummary, create_monitor, run_stream
from .quantiles import QuantileEntry, QuantileTable, default_table, table_load, table_store

__version__ = "0.1.0"
