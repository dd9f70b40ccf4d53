"""Empirical Murphy decomposition of mean score into UNC - RES + CAL.

For pairs ``(x_t, y_t)`` and a consistent scoring function ``s``::

    mean s(x_t, y_t) = UNC - RES + CAL
    UNC = mean s(T(F_y), y_t)
    RES = mean [s(T(F_y), y_t) - s(T(F_{Y|X=x_t}), y_t)]
    CAL = mean [s(x_t, y_t) - s(T(F_{Y|X=x_t}), y_t)]

``T(F_y)`` is the full-sample mean or tau-quantile; the conditional
functional is the local linear kernel fit evaluated at every observed
forecast.  Negative RES or CAL estimates are reported as they are.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .exceptions import DomainError, InsufficientDataError
from .kernelreg import KernelFitConfig, cv_bandwidth, local_linear
from .scoring import LossSpec

MIN_SERIES_LENGTH = 10


@dataclass(frozen=True)
class ForecastSeries:
    """Aligned forecasts and realisations for one horizon."""

    periods: tuple
    horizon: int
    forecasts: np.ndarray
    realizations: np.ndarray

    def __post_init__(self):
        periods = tuple(str(p) for p in self.periods)
        x = np.asarray(self.forecasts, dtype=float)
        y = np.asarray(self.realizations, dtype=float)
        if not (len(periods) == len(x) == len(y)):
            raise DomainError("periods, forecasts and realizations differ in length")
        if len(x) < MIN_SERIES_LENGTH:
            raise InsufficientDataError(
                f"need at least {MIN_SERIES_LENGTH} forecast/realization pairs, got {len(x)}"
            )
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise DomainError("forecasts and realizations must be finite")
        if len(set(periods)) != len(periods):
            raise DomainError("period labels must be unique")
        if int(self.horizon) != self.horizon or self.horizon < 0:
            raise DomainError(f"horizon must be a non-negative integer, got {self.horizon!r}")
        object.__setattr__(self, "periods", periods)
        object.__setattr__(self, "horizon", int(self.horizon))
        object.__setattr__(self, "forecasts", x)
        object.__setattr__(self, "realizations", y)

    @classmethod
    def from_arrays(cls, forecasts, realizations, horizon: int = 0, periods=None) -> "ForecastSeries":
        if periods is None:
            periods = [str(i + 1) for i in range(len(forecasts))]
        return cls(tuple(periods), horizon, forecasts, realizations)

    def __len__(self):
        return len(self.forecasts)


@dataclass(frozen=True)
class DecompositionResult:
    mean_score: float
    unc: float
    res: float
    cal: float
    n: int
    bandwidth: float
    loss: LossSpec
    horizon: Optional[int] = None

    @property
    def identity_residual(self) -> float:
        return self.mean_score - (self.unc - self.res + self.cal)


@dataclass(frozen=True)
class CalibrationCurve:
    grid: np.ndarray
    conditional: np.ndarray
    unconditional: float
    loss: LossSpec
    bandwidth: float


def _require_point_loss(loss: LossSpec):
    if not loss.is_point:
        raise DomainError(
            "decomposition estimation supports squared and check loss only; "
            "a kernel fit on full predictive distributions is not available"
        )


def resolve_bandwidth(series: ForecastSeries, loss: LossSpec, config: KernelFitConfig) -> float:
    """Configured bandwidth, or the CV choice for this series and loss."""
    if config.bandwidth is not None:
        return float(config.bandwidth)
    return cv_bandwidth(loss, series.forecasts, series.realizations, config)


def estimate_decomposition(series: ForecastSeries, loss: LossSpec, config: Optional[KernelFitConfig] = None) -> DecompositionResult:
    """Estimate mean score, UNC, RES and CAL for one forecast series."""
    _require_point_loss(loss)
    config = config or KernelFitConfig()
    x, y = series.forecasts, series.realizations
    h = resolve_bandwidth(series, loss, config)
    conditional, _ = local_linear(loss, x, y, h, x, config.min_effective_weight)

    mean_score = float(np.mean(loss.score(x, y)))
    unc = float(np.mean(loss.score(loss.functional(y), y)))
    cond_score = float(np.mean(loss.score(conditional, y)))
    return DecompositionResult(
        mean_score=mean_score,
        unc=unc,
        res=unc - cond_score,
        cal=mean_score - cond_score,
        n=len(series),
        bandwidth=h,
        loss=loss,
        horizon=series.horizon,
    )


def estimate_by_horizon(multi: Sequence[ForecastSeries], loss: LossSpec, config: Optional[KernelFitConfig] = None) -> List[DecompositionResult]:
    """One decomposition per series; input order is preserved."""
    horizons = [s.horizon for s in multi]
    if len(set(horizons)) != len(horizons):
        raise DomainError(f"horizons must be distinct, got {horizons}")
    return [estimate_decomposition(s, loss, config) for s in multi]


def calibration_curve(series: ForecastSeries, loss: LossSpec, config: Optional[KernelFitConfig] = None, grid_size: int = 101, bandwidth: Optional[float] = None) -> CalibrationCurve:
    """Conditional functional on a uniform grid over the forecast range.

    The bandwidth is the one the decomposition of the same series would use
    (CV unless fixed), so the plot and the decomposition share one fit.
    """
    _require_point_loss(loss)
    if grid_size < 2:
        raise DomainError(f"grid_size must be at least 2, got {grid_size}")
    config = config or KernelFitConfig()
    x, y = series.forecasts, series.realizations
    lo, hi = float(np.min(x)), float(np.max(x))
    grid = np.unique(np.linspace(lo, hi, grid_size))
    if len(grid) < 2:
        raise DomainError("forecasts are constant; a calibration curve needs forecast variation")
    h = bandwidth if bandwidth is not None else resolve_bandwidth(series, loss, config)
    conditional, _ = local_linear(loss, x, y, h, grid, config.min_effective_weight)
    return CalibrationCurve(
        grid=grid,
        conditional=conditional,
        unconditional=loss.functional(y),
        loss=loss,
        bandwidth=float(h),
    )


def normalized_resolution(result: DecompositionResult) -> float:
    """Share of uncertainty resolved by the forecasts, ``RES / UNC``."""
    if not result.unc > 0:
        raise DomainError("uncertainty is zero; normalised resolution is undefined")
    return result.res / result.unc
