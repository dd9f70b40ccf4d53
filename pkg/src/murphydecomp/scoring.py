"""Consistent scoring functions and normal-family entropy/divergence.

All functions accept scalars or numpy arrays and broadcast.  Scalar
inputs give Python floats back.  Non-finite inputs raise
:class:`~murphydecomp.exceptions.DomainError` instead of propagating NaN
into averaged scores.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import DomainError

LOG_2PI = math.log(2.0 * math.pi)


class LossKind(str, enum.Enum):
    SQUARED = "squared"
    CHECK = "check"
    LOG_SCORE_NORMAL = "log_score_normal"


@dataclass(frozen=True)
class LossSpec:
    """Which scoring function to use; fixes the target functional.

    ``tau`` is required for (and only for) the check loss.
    """

    kind: LossKind
    tau: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", LossKind(self.kind))
        if self.kind is LossKind.CHECK:
            if self.tau is None or not 0.0 < float(self.tau) < 1.0:
                raise DomainError(f"check loss needs tau in (0, 1), got {self.tau!r}")
            object.__setattr__(self, "tau", float(self.tau))
        elif self.tau is not None:
            raise DomainError(f"tau is only meaningful for the check loss, not {self.kind.value}")

    @classmethod
    def squared(cls) -> "LossSpec":
        return cls(LossKind.SQUARED)

    @classmethod
    def check(cls, tau: float) -> "LossSpec":
        return cls(LossKind.CHECK, tau)

    @classmethod
    def log_score_normal(cls) -> "LossSpec":
        return cls(LossKind.LOG_SCORE_NORMAL)

    @property
    def is_point(self) -> bool:
        return self.kind in (LossKind.SQUARED, LossKind.CHECK)

    def score(self, x, y):
        """Loss of point forecast(s) ``x`` for outcome(s) ``y``."""
        if self.kind is LossKind.SQUARED:
            return squared_error(x, y)
        if self.kind is LossKind.CHECK:
            return check_loss(self.tau, x, y)
        raise DomainError("log score needs a predictive distribution; use log_score_normal")

    def functional(self, values) -> float:
        """Sample version of the target functional (mean or tau-quantile)."""
        v = _finite(values, "values")
        if v.size == 0:
            raise DomainError("empty sample")
        if self.kind is LossKind.SQUARED:
            return float(np.mean(v))
        if self.kind is LossKind.CHECK:
            return sample_quantile(v, self.tau)
        raise DomainError("no point functional for the log score")

    def describe(self) -> str:
        if self.kind is LossKind.CHECK:
            return f"check(tau={self.tau:g})"
        return self.kind.value


@dataclass(frozen=True)
class NormalParams:
    """Normal predictive distribution, parameterised by mean and variance."""

    mu: float
    sigma2: float

    def __post_init__(self):
        if not (math.isfinite(self.mu) and math.isfinite(self.sigma2)):
            raise DomainError("normal parameters must be finite")
        if not self.sigma2 > 0:
            raise DomainError(f"variance must be positive, got {self.sigma2!r}")


def _finite(a, name: str) -> np.ndarray:
    arr = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    return arr


def _out(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def squared_error(x, y):
    """``(x - y)**2``."""
    x = _finite(x, "forecast")
    y = _finite(y, "outcome")
    return _out((x - y) ** 2)


def check_loss(tau: float, x, y):
    """Quantile score ``rho_tau(y - x)`` with ``rho_tau(u) = u (tau - 1{u < 0})``."""
    if not 0.0 < tau < 1.0:
        raise DomainError(f"tau must lie in (0, 1), got {tau!r}")
    x = _finite(x, "forecast")
    y = _finite(y, "outcome")
    u = y - x
    return _out(u * (tau - (u < 0)))


def log_score_normal(pred: NormalParams, y):
    """Negative log density of ``pred`` at ``y``."""
    y = _finite(y, "outcome")
    return _out(0.5 * (LOG_2PI + math.log(pred.sigma2)) + (y - pred.mu) ** 2 / (2.0 * pred.sigma2))


def log_score_normal_arrays(mu, sigma2, y):
    """Vectorised log score for parallel arrays of normal forecasts."""
    mu = _finite(mu, "mean")
    sigma2 = _finite(sigma2, "variance")
    y = _finite(y, "outcome")
    if np.any(sigma2 <= 0):
        raise DomainError("variances must be positive (a zero variance has no log score)")
    return _out(0.5 * (LOG_2PI + np.log(sigma2)) + (y - mu) ** 2 / (2.0 * sigma2))


def normal_entropy(sigma2: float) -> float:
    """Differential entropy of a normal with variance ``sigma2``."""
    if not (math.isfinite(sigma2) and sigma2 > 0):
        raise DomainError(f"variance must be positive and finite, got {sigma2!r}")
    return 0.5 * (LOG_2PI + math.log(sigma2) + 1.0)


def normal_kl(w: NormalParams, v: NormalParams) -> float:
    """Expected log-score excess of forecast ``w`` when the truth is ``v``.

    This is KL(v || w); zero iff the two parameter pairs coincide.
    """
    ratio = v.sigma2 / w.sigma2
    return 0.5 * ((v.mu - w.mu) ** 2 / w.sigma2 + ratio - math.log(ratio) - 1.0)


def sample_quantile(values, tau: float) -> float:
    """Sample ``tau``-quantile by linear interpolation of order statistics.

    Position ``h = (n - 1) tau`` (0-based), the "type 7" convention.
    """
    if not 0.0 < tau < 1.0:
        raise DomainError(f"tau must lie in (0, 1), got {tau!r}")
    v = _finite(values, "values")
    if v.size == 0:
        raise DomainError("empty sample")
    return float(np.quantile(v, tau, method="linear"))
