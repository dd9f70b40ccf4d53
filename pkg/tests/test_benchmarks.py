import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from murphydecomp.benchmarks import (
    BenchmarkKind,
    History,
    ar1_forecast,
    fit_ar1,
    rolling_benchmark_series,
    unconditional_mean_forecast,
    unconditional_quantile_forecast,
)
from murphydecomp.decomp import estimate_decomposition
from murphydecomp.exceptions import DomainError, EstimationError, InsufficientDataError
from murphydecomp.kernelreg import KernelFitConfig
from murphydecomp.scoring import LossSpec


def ar1_path(n, c, phi, seed, sd=1.0):
    rng = np.random.default_rng(seed)
    y = np.empty(n)
    y[0] = c / (1 - phi)
    for t in range(1, n):
        y[t] = c + phi * y[t - 1] + sd * rng.normal()
    return y


class TestUnconditional:
    def test_mean_examples(self):
        assert unconditional_mean_forecast([1.0, 3.0]) == 2.0
        assert unconditional_mean_forecast([4.0] * 7) == 4.0

    def test_quantile_order_statistics(self):
        # type-7: position (n - 1) * tau = 0.75 between the 1st and 2nd order statistic
        assert unconditional_quantile_forecast([4.0, 1.0, 3.0, 2.0], 0.25) == pytest.approx(1.75, abs=1e-15)
        assert unconditional_quantile_forecast([3.0, 1.0, 2.0], 0.5) == 2.0

    def test_too_short(self):
        with pytest.raises(InsufficientDataError):
            unconditional_mean_forecast([1.0])
        with pytest.raises(InsufficientDataError):
            unconditional_quantile_forecast([1.0], 0.5)

    def test_history_validation(self):
        with pytest.raises(DomainError):
            History([1.0, np.nan])
        with pytest.raises(DomainError):
            History(np.zeros((2, 2)))


class TestAR1:
    def test_noiseless_recovery(self):
        y = ar1_path(30, 1.0, 0.5, 0, sd=0.0)
        y[0] = 0.0
        for t in range(1, 30):
            y[t] = 1.0 + 0.5 * y[t - 1]
        y = y[:6]  # before it settles at the fixed point
        c, phi = fit_ar1(y)
        assert c == pytest.approx(1.0, abs=1e-12) and phi == pytest.approx(0.5, abs=1e-12)
        assert ar1_forecast(y, 1) == pytest.approx(1 + 0.5 * y[-1], abs=1e-12)
        assert ar1_forecast(y, 2) == pytest.approx(1 + 0.5 * (1 + 0.5 * y[-1]), abs=1e-12)

    def test_ols_oracle(self):
        y = ar1_path(200, 0.3, 0.7, 1)
        c, phi = fit_ar1(y)
        slope, intercept = np.polyfit(y[:-1], y[1:], 1)
        assert (c, phi) == pytest.approx((intercept, slope), abs=1e-10)

    def test_long_iteration_reaches_fixed_point(self):
        y = ar1_path(300, 2.0, 0.6, 2)
        c, phi = fit_ar1(y)
        assert ar1_forecast(y, 200) == pytest.approx(c / (1 - phi), abs=1e-10)

    def test_constant_history_is_singular(self):
        with pytest.raises(EstimationError):
            fit_ar1([1.0] * 10)

    @pytest.mark.parametrize("steps", [0, -1, 1.5])
    def test_bad_steps(self, steps):
        with pytest.raises(DomainError):
            ar1_forecast([1.0, 2.0, 0.5, 1.2], steps)

    def test_too_short(self):
        with pytest.raises(InsufficientDataError):
            fit_ar1([1.0, 2.0])

    def test_white_noise_coefficient_near_zero(self):
        phis = [fit_ar1(np.random.default_rng(s).normal(size=400))[1] for s in range(50)]
        assert abs(np.mean(phis)) < 0.02


class TestRollingSeries:
    y = ar1_path(60, 0.5, 0.8, 3)

    def test_alignment_and_window(self):
        for h in (0, 1, 3):
            s = rolling_benchmark_series(self.y, h, "unc-mean", burn_in=10)
            first = 10 + h
            assert s.horizon == h
            assert s.periods[0] == str(first + 1)
            np.testing.assert_array_equal(s.realizations, self.y[first:])
            want = [np.mean(self.y[: t - h]) for t in range(first, len(self.y))]
            np.testing.assert_allclose(s.forecasts, want, rtol=1e-14)

    def test_horizons_shift_window_by_one(self):
        s0 = rolling_benchmark_series(self.y, 0, "ar1", burn_in=10)
        s1 = rolling_benchmark_series(self.y, 1, "ar1", burn_in=10)
        t = 20
        assert s0.forecasts[t - 10] == pytest.approx(ar1_forecast(self.y[:t], 1), abs=1e-14)
        assert s1.forecasts[t - 11] == pytest.approx(ar1_forecast(self.y[: t - 1], 2), abs=1e-14)

    @pytest.mark.parametrize("kind", ["unc-mean", "unc-quantile", "ar1"])
    @pytest.mark.parametrize("h", [0, 2])
    def test_no_lookahead(self, kind, h):
        # altering y[t - h:] cannot change the forecast for target t
        base = rolling_benchmark_series(self.y, h, kind, tau=0.3, burn_in=10)
        t = 30
        mutated = self.y.copy()
        mutated[t - h:] -= 100.0
        alt = rolling_benchmark_series(mutated, h, kind, tau=0.3, burn_in=10)
        k = t - 10 - h
        assert alt.forecasts[k] == base.forecasts[k]
        assert alt.forecasts[k + 1] != base.forecasts[k + 1]

    def test_quantile_needs_tau(self):
        with pytest.raises(DomainError):
            rolling_benchmark_series(self.y, 0, BenchmarkKind.UNC_QUANTILE)

    @pytest.mark.parametrize("kind, burn_in", [("unc-mean", 1), ("ar1", 2)])
    def test_burn_in_floor(self, kind, burn_in):
        with pytest.raises(DomainError):
            rolling_benchmark_series(self.y, 0, kind, burn_in=burn_in)

    def test_no_targets_left(self):
        with pytest.raises(InsufficientDataError):
            rolling_benchmark_series(self.y[:12], 2, "unc-mean", burn_in=10)

    def test_bad_horizon_and_periods(self):
        with pytest.raises(DomainError):
            rolling_benchmark_series(self.y, -1, "unc-mean")
        with pytest.raises(DomainError):
            rolling_benchmark_series(self.y, 0, "unc-mean", periods=["a"])

    def test_custom_periods(self):
        labels = [f"q{i}" for i in range(len(self.y))]
        s = rolling_benchmark_series(self.y, 1, "unc-mean", burn_in=5, periods=labels)
        assert s.periods[0] == "q6"

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(-100, 100), min_size=16, max_size=30), st.integers(0, 3))
    def test_mean_forecast_within_past_range(self, values, h):
        y = np.array(values)
        s = rolling_benchmark_series(y, h, "unc-mean", burn_in=3)
        for k, t in enumerate(range(3 + h, len(y))):
            past = y[: t - h]
            assert past.min() - 1e-9 <= s.forecasts[k] <= past.max() + 1e-9


class TestBenchmarkDecompositions:
    def test_ar1_resolves_persistent_series(self):
        y = ar1_path(500, 0.0, 0.9, 10)
        s = rolling_benchmark_series(y, 0, "ar1")
        r = estimate_decomposition(s, LossSpec.squared())
        assert r.res > 0.5 * r.unc

    def test_unconditional_mean_on_iid_data(self):
        y = np.random.default_rng(11).normal(size=5000)
        s = rolling_benchmark_series(y, 0, "unc-mean")
        r = estimate_decomposition(s, LossSpec.squared())
        assert r.res <= 0.03 * r.unc and r.cal <= 0.03 * r.unc

    def test_unconditional_quantile_check_loss(self):
        y = np.random.default_rng(12).normal(size=300)
        s = rolling_benchmark_series(y, 1, "unc-quantile", tau=0.25)
        r = estimate_decomposition(s, LossSpec.check(0.25), KernelFitConfig(bandwidth=1.0))
        assert r.mean_score == pytest.approx(r.unc - r.res + r.cal, abs=1e-12)
        assert r.res <= 0.1 * r.unc
