"""Local linear kernel estimation of conditional means and quantiles.

At an evaluation point ``x`` the local linear estimator solves

    (a, b) = argmin sum_t s(a + b (x_t - x), y_t) K((x_t - x) / H)

with a Gaussian kernel ``K`` and reports ``a``.  Under squared loss this
is weighted least squares (closed form); under the check loss it is a
weighted linear quantile regression solved exactly by
:func:`murphydecomp._checkfit.fit_check_line`.

Bandwidths are chosen by cross-validation with the same scoring function
that defines the functional: leave-one-out for squared loss, contiguous
5-fold for the check loss (contiguous folds respect serial dependence).
Ties in the CV score go to the largest bandwidth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ._checkfit import fit_check_line
from ._gauss import CUTOFF, local_linear_moments
from .exceptions import (
    BandwidthSelectionError,
    DegenerateNeighborhoodError,
    DomainError,
    InsufficientDataError,
)
from .scoring import LossKind, LossSpec

INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def gaussian_kernel(u):
    """Standard normal density ``(2 pi)^(-1/2) exp(-u^2 / 2)``."""
    u = np.asarray(u, dtype=float)
    out = INV_SQRT_2PI * np.exp(-0.5 * u * u)
    return float(out) if out.ndim == 0 else out


DEFAULT_MIN_EFFECTIVE_WEIGHT = 3.0 * gaussian_kernel(3.0)
DEFAULT_GRID_SIZE = 15
DEFAULT_GRID_RANGE = (0.05, 2.0)
DEFAULT_CHECK_FOLDS = 5
# CV scores within this fraction of the unconditional score count as tied
CV_TIE_RTOL = 1e-9
# below this relative determinant the local design has no slope information
_RANK_RTOL = 1e-12


@dataclass(frozen=True)
class KernelFitConfig:
    """Bandwidth and cross-validation settings.

    Parameters
    ----------
    bandwidth : float, optional
        Fixed bandwidth.  ``None`` selects one by cross-validation.
    bandwidth_grid : sequence of float, optional
        Strictly increasing CV candidates.  ``None`` uses 15 log-spaced
        values from 0.05 to 2 sample standard deviations of the forecasts.
    folds : int, optional
        Number of contiguous CV folds.  ``None`` means the loss default
        (leave-one-out for squared loss, 5 for the check loss).
    leave_one_out : bool
        Force leave-one-out CV regardless of ``folds``.
    min_effective_weight : float
        Smallest admissible kernel mass ``sum_t K((x_t - x)/H)``.
    """

    bandwidth: Optional[float] = None
    bandwidth_grid: Optional[Sequence[float]] = None
    folds: Optional[int] = None
    leave_one_out: bool = False
    min_effective_weight: float = DEFAULT_MIN_EFFECTIVE_WEIGHT

    def __post_init__(self):
        if self.bandwidth is not None and not (math.isfinite(self.bandwidth) and self.bandwidth > 0):
            raise DomainError(f"bandwidth must be positive, got {self.bandwidth!r}")
        if self.bandwidth_grid is not None:
            grid = tuple(float(h) for h in self.bandwidth_grid)
            if not grid:
                raise DomainError("bandwidth grid is empty")
            if any(not (math.isfinite(h) and h > 0) for h in grid):
                raise DomainError("bandwidth grid values must be positive")
            if any(b <= a for a, b in zip(grid, grid[1:])):
                raise DomainError("bandwidth grid must be strictly increasing")
            object.__setattr__(self, "bandwidth_grid", grid)
        if self.folds is not None and self.folds < 2:
            raise DomainError(f"need at least 2 folds, got {self.folds}")
        if not self.min_effective_weight > 0:
            raise DomainError("min_effective_weight must be positive")


@dataclass(frozen=True)
class FittedCurve:
    eval_points: np.ndarray
    fitted: np.ndarray
    bandwidth_used: float
    loss: LossSpec
    slopes: Optional[np.ndarray] = None


def default_bandwidth_grid(xs, size: int = DEFAULT_GRID_SIZE) -> tuple:
    """Log-spaced grid spanning under- to over-smoothing of ``xs``.

    Constant ``xs`` make every bandwidth equivalent; a single value of 1 is
    returned in that case.
    """
    sd = float(np.std(np.asarray(xs, dtype=float), ddof=1))
    if not sd > 0:
        return (1.0,)
    lo, hi = DEFAULT_GRID_RANGE
    return tuple(np.geomspace(lo * sd, hi * sd, size))


def _validate_xy(xs, ys):
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.ndim != 1 or x.shape != y.shape:
        raise DomainError("xs and ys must be one-dimensional and of equal length")
    if len(x) < 3:
        raise InsufficientDataError(f"need at least 3 observations, got {len(x)}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise DomainError("xs and ys must be finite")
    return x, y


def _point_loss(loss: LossSpec):
    if not loss.is_point:
        raise DomainError(f"kernel regression supports squared and check loss, not {loss.kind.value}")


def _squared_moments(x_train, y_train, h, targets):
    m = local_linear_moments(targets, x_train, h, y_train)
    return m[:, 0], m[:, 1], m[:, 2], m[:, 3], m[:, 4]


def _solve_local_linear(s0, s1, s2, t0, t1):
    det = s0 * s2 - s1 * s1
    full = det > _RANK_RTOL * s0 * s2
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(full, (s2 * t0 - s1 * t1) / det, t0 / s0)
        b = np.where(full, (s0 * t1 - s1 * t0) / det, 0.0)
    return a, b


def _check_mass(mass, points, threshold):
    bad = np.flatnonzero(~(mass >= threshold))
    if bad.size:
        i = int(bad[0])
        raise DegenerateNeighborhoodError(float(points[i]), float(mass[i]), threshold)


def _fit_squared(x, y, h, points, min_mass):
    s0, s1, s2, t0, t1 = _squared_moments(x, y, h, points)
    _check_mass(s0 * INV_SQRT_2PI, points, min_mass)
    return _solve_local_linear(s0, s1, s2, t0, t1)


def _fit_check(x, y, h, points, tau, min_mass):
    # sort on (x, y) so the solver sees the same sequence for any input order
    order = np.lexsort((y, x))
    xs, ys = x[order], y[order]
    a = np.empty(len(points))
    b = np.empty(len(points))
    for i, p in enumerate(points):
        lo = np.searchsorted(xs, p - CUTOFF * h, side="left")
        hi = np.searchsorted(xs, p + CUTOFF * h, side="right")
        d = xs[lo:hi] - p
        w = np.exp(-0.5 * (d / h) ** 2)
        mass = float(w.sum()) * INV_SQRT_2PI
        if not mass >= min_mass:
            raise DegenerateNeighborhoodError(float(p), mass, min_mass)
        a[i], b[i], _ = fit_check_line(d, ys[lo:hi], w, tau)
    return a, b


def local_linear(loss: LossSpec, xs, ys, bandwidth: float, eval_points, min_effective_weight=DEFAULT_MIN_EFFECTIVE_WEIGHT):
    """Intercepts and slopes of the local linear fit at ``eval_points``."""
    _point_loss(loss)
    x, y = _validate_xy(xs, ys)
    pts = np.asarray(eval_points, dtype=float).ravel()
    if not np.all(np.isfinite(pts)):
        raise DomainError("evaluation points must be finite")
    if loss.kind is LossKind.SQUARED:
        return _fit_squared(x, y, bandwidth, pts, min_effective_weight)
    return _fit_check(x, y, bandwidth, pts, loss.tau, min_effective_weight)


def fit_local_linear(loss: LossSpec, xs, ys, config: KernelFitConfig, eval_points) -> FittedCurve:
    """Fit the conditional functional at each of ``eval_points``.

    Uses ``config.bandwidth`` when given, otherwise the CV choice.
    """
    h = config.bandwidth if config.bandwidth is not None else cv_bandwidth(loss, xs, ys, config)
    a, b = local_linear(loss, xs, ys, h, eval_points, config.min_effective_weight)
    return FittedCurve(
        eval_points=np.asarray(eval_points, dtype=float).ravel().copy(),
        fitted=a,
        bandwidth_used=float(h),
        loss=loss,
        slopes=b,
    )


def _loo_squared_score(x, y, h, min_mass):
    s0, s1, s2, t0, t1 = _squared_moments(x, y, h, x)
    # remove each point's own contribution: weight exp(0) = 1 at distance 0
    s0 = s0 - 1.0
    t0 = t0 - y
    if np.any(~(s0 * INV_SQRT_2PI >= min_mass)):
        return None
    a, _ = _solve_local_linear(s0, s1, s2, t0, t1)
    return float(np.mean((a - y) ** 2))


def _fold_bounds(n, k):
    edges = np.linspace(0, n, k + 1).round().astype(int)
    return list(zip(edges[:-1], edges[1:]))


def _kfold_score(loss, x, y, h, folds, min_mass):
    total = 0.0
    n = len(x)
    for lo, hi in _fold_bounds(n, folds):
        train = np.r_[0:lo, hi:n]
        try:
            a, _ = local_linear(loss, x[train], y[train], h, x[lo:hi], min_mass)
        except DegenerateNeighborhoodError:
            return None
        total += float(np.sum(loss.score(a, y[lo:hi])))
    return total / n


def cv_scores(loss: LossSpec, xs, ys, config: KernelFitConfig):
    """Cross-validation score for every grid bandwidth (``None`` if degenerate)."""
    _point_loss(loss)
    x, y = _validate_xy(xs, ys)
    grid = config.bandwidth_grid or default_bandwidth_grid(x)
    n = len(x)
    loo = config.leave_one_out or (config.folds is None and loss.kind is LossKind.SQUARED)
    folds = n if loo else (config.folds or DEFAULT_CHECK_FOLDS)
    if folds > n:
        raise InsufficientDataError(f"{folds} folds requested for {n} observations")
    scores = []
    for h in grid:
        if loo and loss.kind is LossKind.SQUARED:
            scores.append(_loo_squared_score(x, y, h, config.min_effective_weight))
        else:
            scores.append(_kfold_score(loss, x, y, h, folds, config.min_effective_weight))
    return tuple(grid), scores


def select_bandwidth(grid, scores, reference: float) -> float:
    """Grid value with minimal score; near-ties go to the largest bandwidth.

    ``reference`` sets the tie tolerance (``CV_TIE_RTOL * reference``).
    """
    valid = [(h, s) for h, s in zip(grid, scores) if s is not None and math.isfinite(s)]
    if not valid:
        raise BandwidthSelectionError("every candidate bandwidth gave a degenerate neighbourhood")
    best = min(s for _, s in valid)
    tol = CV_TIE_RTOL * abs(reference)
    return float(max(h for h, s in valid if s <= best + tol))


def cv_bandwidth(loss: LossSpec, xs, ys, config: KernelFitConfig) -> float:
    """Bandwidth minimising the out-of-fold mean score over the grid."""
    grid, scores = cv_scores(loss, xs, ys, config)
    y = np.asarray(ys, dtype=float)
    reference = float(np.mean(loss.score(loss.functional(y), y)))
    return select_bandwidth(grid, scores, reference)
