import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats
from scipy.optimize import linprog

from murphydecomp.exceptions import BandwidthSelectionError, DegenerateNeighborhoodError, DomainError, InsufficientDataError
from murphydecomp.kernelreg import (
    DEFAULT_MIN_EFFECTIVE_WEIGHT,
    KernelFitConfig,
    _fold_bounds,
    cv_bandwidth,
    cv_scores,
    default_bandwidth_grid,
    fit_local_linear,
    gaussian_kernel,
    local_linear,
)
from murphydecomp.scoring import LossSpec, sample_quantile
from murphydecomp.stylized import ForecasterKind, simulate

SQ = LossSpec.squared()

# pinned on first run; guards against silent changes in CV or the fast sums
GOLDEN_NI50_BANDWIDTH = 2.1781964762768364


def wls_oracle(x, y, h, point):
    """Local linear intercept by an explicit weighted least-squares solve."""
    w = stats.norm.pdf((x - point) / h)
    X = np.column_stack([np.ones_like(x), x - point])
    sw = np.sqrt(w)
    coef, *_ = np.linalg.lstsq(X * sw[:, None], y * sw, rcond=None)
    return coef[0]


def lp_objective(x, y, w, tau):
    n = len(y)
    c = np.r_[0.0, 0.0, w * tau, w * (1 - tau)]
    A = np.hstack([np.ones((n, 1)), x[:, None], np.eye(n), -np.eye(n)])
    res = linprog(c, A_eq=A, b_eq=y, bounds=[(None, None)] * 2 + [(0, None)] * (2 * n), method="highs")
    return res.fun


def mirrored_sample(seed, m=20):
    # pairs (x, y) and (-x, y): the in-sample least-squares and quantile slopes are zero
    rng = np.random.default_rng(seed)
    x0 = rng.uniform(-2, 2, m)
    y0 = 3 * rng.standard_normal(m) + x0
    return np.r_[x0, -x0], np.r_[y0, y0]


class TestGaussianKernel:
    @pytest.mark.parametrize("u, expected", [(0, 0.398942), (1, 0.241971), (-1, 0.241971)])
    def test_examples(self, u, expected):
        assert gaussian_kernel(u) == pytest.approx(expected, abs=1e-6)

    def test_matches_normal_density(self):
        u = np.linspace(-8, 8, 101)
        np.testing.assert_allclose(gaussian_kernel(u), stats.norm.pdf(u), rtol=1e-14)

    def test_default_min_weight(self):
        assert DEFAULT_MIN_EFFECTIVE_WEIGHT == pytest.approx(3 * stats.norm.pdf(3), rel=1e-14)


class TestConfig:
    def test_validation(self):
        with pytest.raises(DomainError):
            KernelFitConfig(bandwidth=0.0)
        with pytest.raises(DomainError):
            KernelFitConfig(bandwidth_grid=[1.0, 1.0])
        with pytest.raises(DomainError):
            KernelFitConfig(bandwidth_grid=[])
        with pytest.raises(DomainError):
            KernelFitConfig(folds=1)
        with pytest.raises(DomainError):
            KernelFitConfig(min_effective_weight=0.0)

    def test_default_grid(self):
        x = np.random.default_rng(0).normal(size=100)
        g = default_bandwidth_grid(x)
        sd = np.std(x, ddof=1)
        assert len(g) == 15
        assert g[0] == pytest.approx(0.05 * sd) and g[-1] == pytest.approx(2 * sd)
        assert np.all(np.diff(np.log(g)) == pytest.approx(np.log(40) / 14))

    def test_constant_grid(self):
        assert default_bandwidth_grid(np.ones(5)) == (1.0,)

    def test_folds_larger_than_sample(self):
        with pytest.raises(InsufficientDataError):
            cv_scores(SQ, np.arange(5.0), np.arange(5.0), KernelFitConfig(folds=6))


class TestSquaredFit:
    def test_three_point_example(self):
        xs, ys = np.array([0.0, 1.0, 2.0]), np.array([0.0, 0.0, 3.0])
        a, _ = local_linear(SQ, xs, ys, 0.5, [1.0], min_effective_weight=1e-6)
        w = gaussian_kernel(np.array([2.0, 0.0, -2.0]))
        X = np.column_stack([np.ones(3), xs - 1.0])
        coef = np.linalg.solve(X.T @ (w[:, None] * X), X.T @ (w * ys))
        assert a[0] == pytest.approx(coef[0], rel=1e-12)

    @pytest.mark.parametrize("n", [30, 800])
    def test_matches_wls_oracle(self, n):
        rng = np.random.default_rng(n)
        x = rng.normal(size=n)
        y = np.sin(2 * x) + 0.3 * rng.normal(size=n)
        pts = np.linspace(-1.5, 1.5, 13)
        for h in (0.1, 0.4, 2.0):
            a, _ = local_linear(SQ, x, y, h, pts)
            want = [wls_oracle(x, y, h, p) for p in pts]
            np.testing.assert_allclose(a, want, rtol=1e-10, atol=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 100_000), st.floats(-5, 5), st.floats(-5, 5), st.floats(0.01, 100))
    def test_exact_on_affine_data(self, seed, alpha, beta, h):
        rng = np.random.default_rng(seed)
        x = rng.uniform(-3, 3, 50)
        y = alpha + beta * x
        # observed points always carry their own kernel mass, even for tiny h
        pts = x[:9]
        a, b = local_linear(SQ, x, y, h, pts)
        np.testing.assert_allclose(a, alpha + beta * pts, atol=1e-8 * (1 + abs(alpha) + abs(beta)))

    def test_degenerate_neighbourhood_names_point(self):
        x = np.r_[np.zeros(10), np.full(10, 100.0)]
        y = np.arange(20.0)
        with pytest.raises(DegenerateNeighborhoodError) as info:
            local_linear(SQ, x, y, 1.0, [0.0, 50.0])
        assert info.value.point == 50.0
        assert "50" in str(info.value)

    def test_constant_forecasts_fall_back_to_local_mean(self):
        y = np.arange(12.0)
        a, b = local_linear(SQ, np.ones(12), y, 1.0, [1.0])
        assert a[0] == pytest.approx(y.mean(), rel=1e-14)
        assert b[0] == 0.0

    def test_large_bandwidth_tends_to_global_line(self):
        rng = np.random.default_rng(4)
        x = rng.uniform(0, 3, 40)
        y = x + rng.normal(size=40)
        pts = np.linspace(0, 3, 5)
        a, _ = local_linear(SQ, x, y, 1e6 * np.ptp(x), pts)
        np.testing.assert_allclose(a, np.polyval(np.polyfit(x, y, 1), pts), atol=1e-8)

    @pytest.mark.parametrize("seed", range(5))
    def test_large_bandwidth_zero_slope_design_gives_mean(self, seed):
        x, y = mirrored_sample(seed)
        a, _ = local_linear(SQ, x, y, 1e6 * np.ptp(x), np.linspace(-2, 2, 7))
        np.testing.assert_allclose(a, y.mean(), atol=1e-6)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 100_000), st.sampled_from([0.05, 0.3, 3.0]))
    def test_permutation_invariant(self, seed, h):
        rng = np.random.default_rng(seed)
        x = np.round(rng.normal(size=300), 1)
        y = rng.normal(size=300)
        p = rng.permutation(300)
        a1, _ = local_linear(SQ, x, y, h, x[:50], min_effective_weight=1e-300)
        a2, _ = local_linear(SQ, x[p], y[p], h, x[:50], min_effective_weight=1e-300)
        assert np.array_equal(a1, a2)

    def test_fit_local_linear_curve(self):
        rng = np.random.default_rng(9)
        x = rng.normal(size=200)
        y = x + rng.normal(size=200)
        curve = fit_local_linear(SQ, x, y, KernelFitConfig(bandwidth=0.5), [0.0, 1.0])
        assert curve.bandwidth_used == 0.5
        assert curve.fitted.shape == curve.eval_points.shape == (2,)
        assert np.all(np.isfinite(curve.fitted))


class TestCheckFit:
    @pytest.mark.parametrize("tau", [0.1, 0.5, 0.9])
    def test_exact_on_affine_data(self, tau):
        x = np.linspace(-2, 2, 30)
        y = 2 * x + 1
        pts = np.array([-1.0, 0.0, 1.5])
        a, b = local_linear(LossSpec.check(tau), x, y, 0.7, pts)
        np.testing.assert_allclose(a, 2 * pts + 1, atol=1e-8)
        np.testing.assert_allclose(b, 2.0, atol=1e-8)

    @pytest.mark.parametrize("tau", [0.25, 0.75])
    def test_attains_lp_minimum(self, tau):
        rng = np.random.default_rng(int(tau * 100))
        x = rng.normal(size=60)
        y = x + rng.standard_t(4, size=60)
        h = 0.6
        for p in (-1.0, 0.0, 0.8):
            a, b = local_linear(LossSpec.check(tau), x, y, h, [p])
            w = np.exp(-0.5 * ((x - p) / h) ** 2)
            r = y - a[0] - b[0] * (x - p)
            got = float(w @ (r * (tau - (r < 0))))
            assert got <= lp_objective(x - p, y, w, tau) + 1e-10

    @pytest.mark.parametrize("seed", range(5))
    @pytest.mark.parametrize("tau", [0.1, 0.5, 0.9])
    def test_large_bandwidth_zero_slope_design_gives_quantile(self, seed, tau):
        x, y = mirrored_sample(seed)
        a, _ = local_linear(LossSpec.check(tau), x, y, 1e6 * np.ptp(x), np.linspace(-2, 2, 5))
        np.testing.assert_allclose(a, sample_quantile(y, tau), atol=1e-6)

    def test_permutation_invariant(self):
        rng = np.random.default_rng(5)
        x = np.round(rng.normal(size=80), 1)
        y = np.round(rng.normal(size=80), 1)
        p = rng.permutation(80)
        loss = LossSpec.check(0.3)
        a1, _ = local_linear(loss, x, y, 0.4, [-0.5, 0.0, 0.7])
        a2, _ = local_linear(loss, x[p], y[p], 0.4, [-0.5, 0.0, 0.7])
        assert np.array_equal(a1, a2)


class TestCrossValidation:
    def test_fold_bounds_contiguous(self):
        b = _fold_bounds(23, 5)
        assert b[0][0] == 0 and b[-1][1] == 23
        assert all(hi == lo2 for (_, hi), (lo2, _) in zip(b, b[1:]))
        assert max(hi - lo for lo, hi in b) - min(hi - lo for lo, hi in b) <= 1

    @pytest.mark.parametrize("loss", [SQ, LossSpec.check(0.5)])
    def test_exact_line_picks_largest(self, loss):
        x = np.linspace(0, 5, 40)
        y = 3 - x
        cfg = KernelFitConfig(bandwidth_grid=(0.1, 1.0, 10.0), min_effective_weight=1e-300)
        assert cv_bandwidth(loss, x, y, cfg) == 10.0

    def test_loo_matches_refit(self):
        rng = np.random.default_rng(21)
        x = rng.normal(size=40)
        y = x**2 + rng.normal(size=40)
        grid = (0.3, 0.8)
        _, scores = cv_scores(SQ, x, y, KernelFitConfig(bandwidth_grid=grid))
        for h, s in zip(grid, scores):
            pred = [wls_oracle(np.delete(x, i), np.delete(y, i), h, x[i]) for i in range(40)]
            assert s == pytest.approx(np.mean((np.array(pred) - y) ** 2), rel=1e-10)

    def test_kfold_matches_manual(self):
        rng = np.random.default_rng(22)
        x = rng.normal(size=50)
        y = x + rng.normal(size=50)
        loss = LossSpec.check(0.5)
        _, (s,) = cv_scores(loss, x, y, KernelFitConfig(bandwidth_grid=(0.7,)))
        total = 0.0
        for lo, hi in _fold_bounds(50, 5):
            keep = np.r_[0:lo, hi:50]
            a, _ = local_linear(loss, x[keep], y[keep], 0.7, x[lo:hi])
            total += np.sum(loss.score(a, y[lo:hi]))
        assert s == pytest.approx(total / 50, rel=1e-14)

    def test_degenerate_bandwidths_skipped(self):
        x = np.r_[np.linspace(0, 1, 15), np.linspace(50, 51, 15)]
        y = np.sin(x)
        grid, scores = cv_scores(SQ, x, y, KernelFitConfig(bandwidth_grid=(0.01, 0.5, 100.0)))
        assert scores[0] is None
        assert scores[2] is not None

    def test_all_degenerate_raises(self):
        x = np.arange(10.0) * 100
        with pytest.raises(BandwidthSelectionError):
            cv_bandwidth(SQ, x, x, KernelFitConfig(bandwidth_grid=(0.01, 0.02)))

    def test_golden_ni_bandwidth(self):
        p = simulate(ForecasterKind("ni", 0.5), 50, 2024)
        h = cv_bandwidth(SQ, p.mean_forecast, p.y, KernelFitConfig())
        assert h == pytest.approx(GOLDEN_NI50_BANDWIDTH, rel=1e-12)
        assert h in default_bandwidth_grid(p.mean_forecast)

    @pytest.mark.xfail(
        strict=True,
        reason="strict CV minimisation picks an interior bandwidth in about a third of pure-noise samples",
    )
    def test_pure_noise_prefers_largest_bandwidth(self):
        hits = 0
        for r in range(200):
            rng = np.random.default_rng(1000 + r)
            x, y = rng.standard_normal((2, 200))
            hits += cv_bandwidth(SQ, x, y, KernelFitConfig()) == default_bandwidth_grid(x)[-1]
        assert hits / 200 > 0.8

    def test_pure_noise_largest_bandwidth_is_modal(self):
        counts = {}
        for r in range(200):
            rng = np.random.default_rng(1000 + r)
            x, y = rng.standard_normal((2, 200))
            idx = default_bandwidth_grid(x).index(cv_bandwidth(SQ, x, y, KernelFitConfig()))
            counts[idx] = counts.get(idx, 0) + 1
        assert max(counts, key=counts.get) == 14
        assert counts[14] / 200 > 0.5
