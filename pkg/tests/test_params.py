import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seqcusum.detectors import PrefixSumState, detector_value
from seqcusum.errors import ConfigurationError, DataError
from seqcusum.lrv import long_run_variance
from seqcusum.params import (
    MEAN,
    VARIANCE,
    Parameter,
    ParamState,
    influence_sigma,
    param_change_point,
    param_detector_value,
    plugin_estimate,
)
from seqcusum.detectors import change_point_estimate


def feed(cls, x, m):
    s = cls(x[:m])
    for v in x[m:]:
        s.push(v)
    return s


def naive_param(x, m, k, param, kind):
    vals = []
    for j in range(m, k):
        d = plugin_estimate(param, x[:j]) - plugin_estimate(param, x[j:k])
        vals.append(j * (k - j) / m**1.5 * d)
    v = np.abs(vals)
    return {"R": v.max(), "S": v.sum() / m, "T": np.sqrt((v * v).sum() / m)}[kind]


class TestPlugin:
    def test_examples(self):
        assert plugin_estimate(VARIANCE, [1, 1, 1]) == 0.0
        assert plugin_estimate(Parameter("quantile", 0.5), [3, 1, 2]) == 2.0
        assert plugin_estimate(MEAN, [1, 2, 6]) == 3.0
        assert plugin_estimate(VARIANCE, [0, 2]) == 1.0

    def test_quantile_upper_order_statistic(self):
        x = [5, 1, 4, 2, 3]
        assert plugin_estimate(Parameter("quantile", 0.2), x) == 1.0
        assert plugin_estimate(Parameter("quantile", 0.21), x) == 2.0
        assert plugin_estimate(Parameter("quantile", 0.99), x) == 5.0

    def test_errors(self):
        with pytest.raises(DataError):
            plugin_estimate(MEAN, [])
        with pytest.raises(ConfigurationError):
            Parameter("quantile", 1.0)
        with pytest.raises(ConfigurationError):
            Parameter.parse("median")

    def test_parse(self):
        assert Parameter.parse("quantile:0.9") == Parameter("quantile", 0.9)
        assert Parameter.parse("Variance") == VARIANCE


class TestDetectors:
    def test_mean_reduces_to_base(self):
        rng = np.random.default_rng(0)
        worst = 0.0
        for _ in range(100):
            m = int(rng.integers(4, 30))
            x = rng.standard_t(4, size=m + int(rng.integers(1, 150)))
            base = feed(PrefixSumState, x, m)
            par = feed(ParamState, x, m)
            for kind in "RST":
                a, b = param_detector_value(par, MEAN, kind), detector_value(base, kind)
                worst = max(worst, abs(a - b) / max(abs(b), 1e-300))
            assert param_change_point(par, MEAN) == change_point_estimate(base)
        assert worst < 1e-10

    @pytest.mark.parametrize("param", [VARIANCE, Parameter("quantile", 0.5), Parameter("quantile", 0.9)])
    def test_matches_naive(self, param):
        rng = np.random.default_rng(1)
        x = rng.normal(size=70)
        s = ParamState(x[:10])
        for k in range(11, 71):
            s.push(x[k - 1])
            for kind in "RST":
                assert param_detector_value(s, param, kind) == pytest.approx(naive_param(x, 10, k, param, kind), rel=1e-9)

    def test_constant_data_zero(self):
        s = feed(ParamState, [2.0] * 40, 10)
        for param in (MEAN, VARIANCE, Parameter("quantile", 0.3)):
            for kind in "RST":
                assert param_detector_value(s, param, kind) == 0.0

    def test_variance_step_grows(self):
        rng = np.random.default_rng(2)
        m = 100
        x = np.concatenate([rng.normal(size=m), rng.normal(scale=2.0, size=3000)])
        s = ParamState(x[:m])
        seen = []
        for k, v in enumerate(x[m:], start=m + 1):
            s.push(v)
            if k % 500 == 0:
                seen.append(param_detector_value(s, VARIANCE, "R"))
        assert all(b > a for a, b in zip(seen, seen[1:]))
        assert seen[-1] > 20 * seen[0] / 5

    def test_E_refused(self):
        s = feed(ParamState, [1.0, 2.0, 3.0, 4.0, 5.0], 3)
        with pytest.raises(ConfigurationError):
            param_detector_value(s, VARIANCE, "E")

    def test_precondition(self):
        with pytest.raises(ConfigurationError):
            ParamState([1.0, 2.0, 3.0]).differences(MEAN)

    def test_prefix_variance_on_long_stream(self):
        rng = np.random.default_rng(3)
        n = 10**6
        x = rng.normal(5.0, 3.0, size=n)
        s = ParamState(x[:100])
        s._x.extend(x[100:])
        d = x - s.center
        s._p1 = [0.0, *np.cumsum(d)]
        s._p2 = [0.0, *np.cumsum(d * d)]
        s.k = n
        diffs = s.differences(VARIANCE)
        for j in (100, 1000, 500_000, n - 1000, n - 10):
            direct = np.var(x[:j]) - np.var(x[j:])
            assert diffs[j - 100] == pytest.approx(direct, rel=1e-9, abs=1e-9 * np.var(x))

    def test_prefix_sums_match_rebuild(self):
        rng = np.random.default_rng(4)
        x = rng.normal(size=2000)
        s = feed(ParamState, x, 50)
        d = x - s.center
        np.testing.assert_allclose(s.prefix2[1:], np.cumsum(d * d), rtol=1e-10)
        np.testing.assert_allclose(s.prefix1[1:], np.cumsum(d), rtol=1e-10, atol=1e-10)


class TestInfluenceSigma:
    def test_mean_is_plain_lrv(self):
        x = np.random.default_rng(5).normal(size=300)
        assert influence_sigma(MEAN, x) == long_run_variance(x)

    def test_variance_iid_normal(self):
        x = np.random.default_rng(6).normal(size=20000)
        assert influence_sigma(VARIANCE, x).sigma2 == pytest.approx(2.0, rel=0.2)

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 2**31), c=st.floats(0.1, 10.0))
    def test_c4_scaling(self, seed, c):
        x = np.random.default_rng(seed).normal(size=200)
        a = influence_sigma(VARIANCE, x).sigma2
        b = influence_sigma(VARIANCE, c * x).sigma2
        assert b == pytest.approx(c**4 * a, rel=1e-9)

    def test_quantile_refused(self):
        with pytest.raises(ConfigurationError, match="explicitly"):
            influence_sigma(Parameter("quantile", 0.5), np.arange(10.0))
