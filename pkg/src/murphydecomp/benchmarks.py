"""Feasible benchmark forecasts built on an expanding window.

For a target index ``t`` and horizon ``h`` the information set holds the
realisations with index ``< t - h``.  A horizon-0 forecast (nowcast) thus
uses everything before the target period, and each extra quarter of
horizon drops one more observation.  AR(1) forecasts are refitted at each
origin and iterated ``h + 1`` steps from the last observed value.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .decomp import ForecastSeries
from .exceptions import DomainError, EstimationError, InsufficientDataError
from .scoring import sample_quantile

DEFAULT_BURN_IN = 20


class BenchmarkKind(str, enum.Enum):
    UNC_MEAN = "unc-mean"
    UNC_QUANTILE = "unc-quantile"
    AR1 = "ar1"


@dataclass(frozen=True)
class History:
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1:
            raise DomainError("history must be one-dimensional")
        if not np.all(np.isfinite(v)):
            raise DomainError("history must be finite")
        object.__setattr__(self, "values", v)

    def __len__(self):
        return len(self.values)


def _as_history(h) -> History:
    return h if isinstance(h, History) else History(h)


def unconditional_mean_forecast(h) -> float:
    h = _as_history(h)
    if len(h) < 2:
        raise InsufficientDataError(f"need at least 2 past values, got {len(h)}")
    return float(np.mean(h.values))


def unconditional_quantile_forecast(h, tau: float) -> float:
    h = _as_history(h)
    if len(h) < 2:
        raise InsufficientDataError(f"need at least 2 past values, got {len(h)}")
    return sample_quantile(h.values, tau)


def fit_ar1(h):
    """OLS estimates ``(c, phi)`` of ``y_t = c + phi y_{t-1} + e_t``."""
    h = _as_history(h)
    if len(h) < 3:
        raise InsufficientDataError(f"AR(1) needs at least 3 past values, got {len(h)}")
    lagged = h.values[:-1]
    current = h.values[1:]
    if np.ptp(lagged) == 0:
        raise EstimationError("AR(1) design is singular: lagged values are constant")
    design = np.column_stack([np.ones_like(lagged), lagged])
    (c, phi), *_ = np.linalg.lstsq(design, current, rcond=None)
    return float(c), float(phi)


def ar1_forecast(h, steps: int = 1) -> float:
    """Iterate the fitted AR(1) recursion ``steps`` times from the last value."""
    if int(steps) != steps or steps < 1:
        raise DomainError(f"steps must be a positive integer, got {steps!r}")
    h = _as_history(h)
    c, phi = fit_ar1(h)
    value = float(h.values[-1])
    for _ in range(int(steps)):
        value = c + phi * value
    return value


def rolling_benchmark_series(
    realizations: Sequence[float],
    horizon: int,
    kind: BenchmarkKind,
    tau: Optional[float] = None,
    burn_in: int = DEFAULT_BURN_IN,
    periods: Optional[Sequence[str]] = None,
) -> ForecastSeries:
    """Pseudo-out-of-sample benchmark forecasts paired with realisations.

    The first target is the earliest index whose window holds ``burn_in``
    observations.
    """
    kind = BenchmarkKind(kind)
    y = np.asarray(realizations, dtype=float)
    if not np.all(np.isfinite(y)):
        raise DomainError("realizations must be finite")
    if int(horizon) != horizon or horizon < 0:
        raise DomainError(f"horizon must be a non-negative integer, got {horizon!r}")
    if kind is BenchmarkKind.UNC_QUANTILE and tau is None:
        raise DomainError("unconditional quantile benchmark needs tau")
    minimum = 3 if kind is BenchmarkKind.AR1 else 2
    if burn_in < minimum:
        raise DomainError(f"burn-in must be at least {minimum} for {kind.value}")
    if periods is None:
        periods = [str(i + 1) for i in range(len(y))]
    elif len(periods) != len(y):
        raise DomainError("periods and realizations differ in length")

    first = burn_in + horizon
    if first >= len(y):
        raise InsufficientDataError(
            f"{len(y)} observations leave no targets after burn-in {burn_in} at horizon {horizon}"
        )
    forecasts = []
    for t in range(first, len(y)):
        window = y[: t - horizon]
        if kind is BenchmarkKind.UNC_MEAN:
            forecasts.append(unconditional_mean_forecast(window))
        elif kind is BenchmarkKind.UNC_QUANTILE:
            forecasts.append(unconditional_quantile_forecast(window, tau))
        else:
            forecasts.append(ar1_forecast(window, horizon + 1))
    return ForecastSeries(tuple(periods[first:]), horizon, np.array(forecasts), y[first:])
