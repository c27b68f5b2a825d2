import numpy as np
import pytest

from seqcusum.errors import ConfigurationError
from seqcusum.lrv import long_run_variance
from seqcusum.simulation import (
    DetectorCell,
    ExperimentConfig,
    ModelId,
    ShiftSpec,
    generate,
    inject_shift,
    run_experiment,
    run_level_experiment,
    run_power_experiment,
)


def lag1(x):
    d = x - x.mean()
    return float(np.dot(d[:-1], d[1:]) / np.dot(d, d))


class TestGenerate:
    def test_m1_mean(self):
        assert abs(generate("M1", 10**6, 1).mean()) < 0.005

    def test_m5_autocorrelation(self):
        assert lag1(generate("M5", 10**6, 2)) == pytest.approx(0.7, abs=0.01)

    def test_m10_mean(self):
        assert generate("M10", 10**6, 3).mean() == pytest.approx(3.0, abs=0.01)

    def test_garch_variance(self):
        x = generate("M7", 10**6, 4)
        assert x.var() == pytest.approx(0.012 / (1 - 0.919 - 0.072), rel=0.15)

    def test_t5_variance(self):
        assert generate("M6", 10**6, 5).var() == pytest.approx(5 / 3, rel=0.03)

    @pytest.mark.parametrize("model", list(ModelId))
    def test_deterministic(self, model):
        a = generate(model, 500, 42)
        assert a.shape == (500,) and np.all(np.isfinite(a))
        np.testing.assert_array_equal(a, generate(model, 500, 42))
        assert not np.array_equal(a, generate(model, 500, 43))

    @pytest.mark.parametrize("model", ["M2", "M3", "M4", "M5"])
    def test_burn_in_independence(self, model):
        a = generate(model, 10**5, 7, burn_in=100)
        b = generate(model, 10**5, 7, burn_in=200)
        se = a.std() / np.sqrt(a.size) * 10
        assert abs(a.mean() - b.mean()) < 3 * se
        assert a.var() == pytest.approx(b.var(), rel=0.05)

    def test_lrv_never_floors(self):
        for model in ModelId:
            for seed in range(100):
                assert not long_run_variance(generate(model, 100, seed)).floored


class TestShift:
    def test_examples(self):
        np.testing.assert_array_equal(inject_shift([0, 0, 0, 0], ShiftSpec(2, 1.0)), [0, 0, 1, 1])
        x = np.arange(5.0)
        np.testing.assert_array_equal(inject_shift(x, ShiftSpec(1, 0.0)), x)

    def test_constant_input(self):
        y = inject_shift(np.full(10, 2.0), ShiftSpec(4, 0.7))
        assert y[4:].mean() - y[:4].mean() == pytest.approx(0.7)

    def test_k_star_out_of_range(self):
        with pytest.raises(ConfigurationError):
            inject_shift([0.0, 0.0], ShiftSpec(2, 1.0))


class TestCells:
    def test_parse(self):
        assert DetectorCell.parse("S:0.01:0.85:0.1") == DetectorCell("S", 0.01, 0.85, 0.1)
        assert DetectorCell.parse("E") == DetectorCell("E", 0.0, 0.0, 0.05)
        with pytest.raises(ConfigurationError):
            DetectorCell.parse("R:x")

    def test_config_errors(self):
        with pytest.raises(ConfigurationError):
            ExperimentConfig("M1", 100, 100, detectors=["R"])
        with pytest.raises(ConfigurationError):
            ExperimentConfig("M1", 100, 200, shift=ShiftSpec(50, 1.0), detectors=["R"])
        with pytest.raises(ConfigurationError):
            ExperimentConfig("M1", 100, 200, detectors=[])


ALL_CELLS = ["R:0.001:0:0.05", "S:0.001:0:0.05", "T:0.001:0:0.05", "E:0:0:0.05", "Q:0:0:0.05"]


class TestExperiments:
    def test_infinite_quantile(self):
        cfg = ExperimentConfig("M1", 50, 400, detectors=ALL_CELLS, replications=20, quantile_override=np.inf)
        res = run_level_experiment(cfg)
        assert all(c.rejection_pct == 0.0 for c in res.cells)

    def test_nested_horizons(self):
        cfg = ExperimentConfig("M3", 50, 1500, detectors=ALL_CELLS, replications=60, seed=3, quantile_override=0.9)
        res = run_experiment(cfg)
        r_short, r_mid = res.rejection_at(300), res.rejection_at(800)
        r_full = [c.rejection_pct for c in res.cells]
        assert all(a <= b <= c for a, b, c in zip(r_short, r_mid, r_full))
        assert r_full == res.rejection_at(1500)

    def test_saturation(self):
        cfg = ExperimentConfig("M1", 100, 600, ShiftSpec(110, 5.0), ALL_CELLS, replications=100, seed=4)
        res = run_power_experiment(cfg)
        assert all(c.rejection_pct >= 99.0 for c in res.cells)
        assert all(c.mean_delay > 0 for c in res.cells)

    def test_power_monotone_in_delta(self):
        rates = []
        for delta in (0.1, 0.3, 0.5):
            cfg = ExperimentConfig("M1", 100, 1100, ShiftSpec(300, delta), ["T:0.001:0:0.05", "R:0.001:0:0.05"], replications=100, seed=5)
            rates.append([c.rejection_pct for c in run_power_experiment(cfg).cells])
        for col in zip(*rates):
            assert col[0] <= col[1] <= col[2]

    def test_null_alternative_coupling(self):
        reps = 150
        null = ExperimentConfig("M1", 100, 1500, None, ALL_CELLS, replications=reps, seed=6)
        alt = ExperimentConfig("M1", 100, 1500, ShiftSpec(400, 0.3), ALL_CELLS, replications=reps, seed=6)
        r0 = run_experiment(null)
        r1 = run_experiment(alt)
        for c0, c1 in zip(r0.cells, r1.cells):
            p = c0.rejection_pct / 100
            se = 100 * np.sqrt(max(p * (1 - p), 1 / reps) / reps)
            assert c1.rejection_pct >= c0.rejection_pct - 2 * se

    def test_deterministic_across_workers(self):
        kw = dict(detectors=ALL_CELLS, replications=12, seed=9, quantile_override=0.8)
        a = run_experiment(ExperimentConfig("M7", 40, 600, **kw))
        b = run_experiment(ExperimentConfig("M7", 40, 600, workers=2, **kw))
        np.testing.assert_array_equal(a.alarm_index, b.alarm_index)
        assert a.to_csv() == b.to_csv()

    def test_level_rejects_shift(self):
        with pytest.raises(ConfigurationError):
            run_level_experiment(ExperimentConfig("M1", 50, 100, ShiftSpec(60, 1.0), ["R"], replications=1))
        with pytest.raises(ConfigurationError):
            run_power_experiment(ExperimentConfig("M1", 50, 100, None, ["R"], replications=1))

    def test_csv_layout(self):
        cfg = ExperimentConfig("M1", 50, 300, None, ALL_CELLS, replications=5, quantile_override=5.0)
        lines = run_experiment(cfg).to_csv().splitlines()
        assert lines[0] == "kind,eta,gamma,alpha,rejection_pct,mean_delay"
        assert len(lines) == 6 and lines[1].startswith("R,0.001,0,0.05,")
