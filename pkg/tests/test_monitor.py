import json
import math

import numpy as np
import pytest

from seqcusum.detectors import DetectorValue, ThresholdSpec, normalized_detector
from seqcusum.errors import ConfigurationError, DataError, StateError
from seqcusum.monitor import AlarmReport, MonitorConfig, NoAlarmSummary, create_monitor, report_dict, run_stream
from seqcusum.params import VARIANCE

T_SPEC = ThresholdSpec("T", 0.001, 0.0)


def learning(m=100, seed=0):
    return np.random.default_rng(seed).normal(size=m)


def test_shipped_quantile_selected():
    mon = create_monitor(MonitorConfig(T_SPEC, 0.05), learning())
    assert mon.quantile.quantile == 1.121
    assert mon.sigma > 0 and not mon.alarmed


def test_explicit_quantile_overrides():
    mon = create_monitor(MonitorConfig(T_SPEC, 0.05, quantile=2.5), learning())
    assert mon.quantile.quantile == 2.5


def test_missing_cell_lists_neighbours():
    with pytest.raises(ConfigurationError, match="nearest"):
        create_monitor(MonitorConfig(ThresholdSpec("T", 0.001, 0.3), 0.05), learning())


def test_constant_learning_rejected():
    with pytest.raises(DataError):
        create_monitor(MonitorConfig(T_SPEC), [1.0] * 50)


def test_config_validation():
    with pytest.raises(ConfigurationError):
        MonitorConfig(T_SPEC, alpha=0.5)
    with pytest.raises(ConfigurationError):
        MonitorConfig(T_SPEC, quantile=0.0)
    with pytest.raises(ConfigurationError):
        MonitorConfig(ThresholdSpec("Q"), parameter=VARIANCE)


def test_large_eta_warns():
    with pytest.warns(RuntimeWarning, match="eta"):
        create_monitor(MonitorConfig(ThresholdSpec("R", 0.1, 0.0), quantile=3.0), learning())


def test_stream_at_learning_mean_never_alarms():
    x = learning(50)
    mon = create_monitor(MonitorConfig(T_SPEC), x)
    for _ in range(300):
        out = mon.step(float(x.mean()))
        assert isinstance(out, DetectorValue)
        assert out.normalized == pytest.approx(0.0, abs=1e-12)


def test_normalized_matches_direct_call():
    rng = np.random.default_rng(1)
    mon = create_monitor(MonitorConfig(T_SPEC), learning())
    for v in rng.normal(size=200):
        out = mon.step(v)
        direct = normalized_detector(mon.state, "T", T_SPEC, mon.sigma)
        assert out.normalized == pytest.approx(direct.normalized, rel=1e-14)


def test_large_shift_detected_quickly():
    hits = 0
    for seed in range(200):
        rng = np.random.default_rng(seed)
        mon = create_monitor(MonitorConfig(T_SPEC), rng.normal(size=100))
        report = run_stream(mon, rng.normal(2.0, 1.0, size=200))
        hits += isinstance(report, AlarmReport)
    assert hits >= 198


def test_alarm_report_and_stop_once():
    rng = np.random.default_rng(2)
    x = learning()
    stream = np.concatenate([rng.normal(size=50), rng.normal(3.0, 1.0, size=200)])
    mon = create_monitor(MonitorConfig(T_SPEC), x)
    report = run_stream(mon, stream)
    assert isinstance(report, AlarmReport)
    assert report.normalized > report.quantile
    assert 101 <= report.change_point <= report.alarm_index
    assert report.consumed == report.alarm_index - 100
    with pytest.raises(StateError):
        mon.step(0.0)
    again = run_stream(create_monitor(MonitorConfig(T_SPEC), x), stream)
    assert again == report


def test_exceedance_is_first_crossing():
    rng = np.random.default_rng(3)
    x = learning()
    stream = np.concatenate([rng.normal(size=30), rng.normal(1.5, 1.0, size=300)])
    mon = create_monitor(MonitorConfig(T_SPEC), x)
    values = []
    for v in stream:
        out = mon.step(v)
        values.append(out.normalized)
        if isinstance(out, AlarmReport):
            break
    assert values[-1] > 1.121 and all(v <= 1.121 for v in values[:-1])


@pytest.mark.parametrize("a, b", [(10.0, 3.0), (-1e3, 0.01), (0.5, 250.0)])
def test_affine_robustness(a, b):
    rng = np.random.default_rng(4)
    x = learning()
    stream = np.concatenate([rng.normal(size=40), rng.normal(1.0, 1.0, size=400)])
    base = run_stream(create_monitor(MonitorConfig(T_SPEC), x), stream)
    moved = run_stream(create_monitor(MonitorConfig(T_SPEC), a + b * x), a + b * stream)
    assert isinstance(base, AlarmReport)
    assert moved.alarm_index == base.alarm_index
    assert moved.change_point == base.change_point
    assert moved.normalized == pytest.approx(base.normalized, rel=1e-6)


def test_empty_source():
    s = run_stream(create_monitor(MonitorConfig(T_SPEC), learning()), [])
    assert isinstance(s, NoAlarmSummary) and s.consumed == 0 and s.max_index is None


def test_short_source_summary():
    s = run_stream(create_monitor(MonitorConfig(T_SPEC), learning()), learning(20, seed=9))
    assert isinstance(s, NoAlarmSummary)
    assert s.consumed == 20 and s.max_normalized < s.quantile


def test_non_finite_observation():
    mon = create_monitor(MonitorConfig(T_SPEC), learning())
    with pytest.raises(DataError):
        mon.step(math.nan)


def test_variance_parameter_monitor():
    rng = np.random.default_rng(5)
    cfg = MonitorConfig(ThresholdSpec("R", 0.001, 0.0), parameter=VARIANCE)
    report = run_stream(create_monitor(cfg, rng.normal(size=200)), rng.normal(0, 3.0, size=2000))
    assert isinstance(report, AlarmReport)


def test_report_dict_keys():
    report = run_stream(create_monitor(MonitorConfig(T_SPEC), learning()), np.full(100, 5.0))
    d = report_dict(report)
    for key in ("alarm_index", "change_point", "normalized", "quantile", "sigma", "consumed"):
        assert key in d
    json.dumps(d)
    s = report_dict(run_stream(create_monitor(MonitorConfig(T_SPEC), learning()), []))
    assert s["alarm"] is False and s["alarm_index"] is None
