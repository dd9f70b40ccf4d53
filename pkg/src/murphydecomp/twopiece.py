"""Two-piece (split) normal distribution, Bank of England parametrisation.

Parameters are the mode ``mu``, a dispersion ``sigma`` (not the standard
deviation) and an inverse skewness ``gamma`` in (-1, 1).  The density is

    f(x) = A / (sqrt(2 pi) sigma) * exp(-(1 - gamma) (x - mu)^2 / (2 sigma^2))   x <= mu
    f(x) = A / (sqrt(2 pi) sigma) * exp(-(1 + gamma) (x - mu)^2 / (2 sigma^2))   x >  mu

with ``A = 2 / (1/sqrt(1 - gamma) + 1/sqrt(1 + gamma))``.  Equivalently the
two halves are normal kernels with scales ``s1 = sigma/sqrt(1 - gamma)``
(left) and ``s2 = sigma/sqrt(1 + gamma)`` (right), weighted so the density
is continuous at the mode.

The BoE reports ``xi = mean - mode`` instead of ``gamma``;
:func:`gamma_from_xi` converts.  A positive ``xi`` (mean above the mode)
means a heavier right half and hence a negative ``gamma``.

Standard normal ``Phi`` and ``Phi^{-1}`` come from ``scipy.special.ndtr``
and ``ndtri`` (Cephes rational approximations, accurate to a few ulp).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import ndtr, ndtri

from .exceptions import DomainError, ParameterRangeError

SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


@dataclass(frozen=True)
class TwoPieceNormalParams:
    mu: float
    sigma: float
    gamma: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.mu, self.sigma, self.gamma)):
            raise ParameterRangeError("two-piece normal parameters must be finite")
        if not self.sigma > 0:
            raise ParameterRangeError(f"sigma must be positive, got {self.sigma!r}")
        if not -1.0 < self.gamma < 1.0:
            raise ParameterRangeError(f"gamma must lie in (-1, 1), got {self.gamma!r}")

    @property
    def sigma_left(self) -> float:
        return self.sigma / math.sqrt(1.0 - self.gamma)

    @property
    def sigma_right(self) -> float:
        return self.sigma / math.sqrt(1.0 + self.gamma)

    @property
    def normalizer(self) -> float:
        return 2.0 / (1.0 / math.sqrt(1.0 - self.gamma) + 1.0 / math.sqrt(1.0 + self.gamma))

    @property
    def mode_probability(self) -> float:
        """``P(X <= mu) = s1 / (s1 + s2)``."""
        s1, s2 = self.sigma_left, self.sigma_right
        return s1 / (s1 + s2)


@dataclass(frozen=True)
class BoeReportedParams:
    mu: float
    sigma: float
    xi: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.mu, self.sigma, self.xi)):
            raise ParameterRangeError("reported parameters must be finite")
        if not self.sigma > 0:
            raise ParameterRangeError(f"sigma must be positive, got {self.sigma!r}")


def _out(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def density(p: TwoPieceNormalParams, x):
    x = np.asarray(x, dtype=float)
    z = x - p.mu
    curvature = np.where(z <= 0, 1.0 - p.gamma, 1.0 + p.gamma)
    peak = p.normalizer / (math.sqrt(2.0 * math.pi) * p.sigma)
    return _out(peak * np.exp(-curvature * z * z / (2.0 * p.sigma**2)))


def cdf(p: TwoPieceNormalParams, x):
    x = np.asarray(x, dtype=float)
    s1, s2 = p.sigma_left, p.sigma_right
    total = s1 + s2
    z = x - p.mu
    left = 2.0 * s1 / total * ndtr(np.minimum(z, 0.0) / s1)
    right = (s1 - s2 + 2.0 * s2 * ndtr(np.maximum(z, 0.0) / s2)) / total
    return _out(np.where(z <= 0, left, right))


def quantile(p: TwoPieceNormalParams, tau):
    """Inverse of :func:`cdf`, piecewise in closed form."""
    t = np.asarray(tau, dtype=float)
    if np.any(~((t > 0) & (t < 1))):
        raise DomainError("quantile levels must lie strictly inside (0, 1)")
    s1, s2 = p.sigma_left, p.sigma_right
    total = s1 + s2
    lower = t <= s1 / total
    left = p.mu + s1 * ndtri(np.minimum(t * total / (2.0 * s1), 0.5))
    right = p.mu + s2 * ndtri(np.clip((t * total + s2 - s1) / (2.0 * s2), 0.5, None))
    return _out(np.where(lower, left, right))


def mean(p: TwoPieceNormalParams) -> float:
    """``mu + sqrt(2/pi) (s2 - s1)``."""
    return p.mu + SQRT_2_OVER_PI * (p.sigma_right - p.sigma_left)


def gamma_from_xi(r: BoeReportedParams) -> float:
    """Inverse skewness implied by the reported mean-mode gap ``xi``."""
    if r.xi == 0:
        return 0.0
    beta = math.pi / (2.0 * r.sigma**2) * r.xi**2
    # ratio = (sqrt(1 + 2 beta) - 1) / beta = 2 / (s + 1) with s = sqrt(1 + 2 beta);
    # 1 - ratio = 2 beta / (s + 1)^2 avoids cancellation for small beta
    s = math.sqrt(1.0 + 2.0 * beta)
    ratio = 2.0 / (s + 1.0)
    magnitude = math.sqrt(2.0 * beta / (s + 1.0) ** 2 * (1.0 + ratio))
    gamma = -magnitude if r.xi > 0 else magnitude
    if not -1.0 < gamma < 1.0:
        raise ParameterRangeError(
            f"skew xi={r.xi!r} with sigma={r.sigma!r} implies gamma={gamma!r}, outside (-1, 1)"
        )
    return gamma


def from_reported(r: BoeReportedParams) -> TwoPieceNormalParams:
    return TwoPieceNormalParams(r.mu, r.sigma, gamma_from_xi(r))


def boe_quantile_forecasts(r: BoeReportedParams, taus: Sequence[float]) -> np.ndarray:
    """Quantiles at ``taus`` of the distribution described by ``r``."""
    t = np.asarray(taus, dtype=float)
    if np.any(np.diff(t) <= 0):
        raise DomainError("quantile levels must be strictly increasing")
    return np.asarray(quantile(from_reported(r), t), dtype=float)
