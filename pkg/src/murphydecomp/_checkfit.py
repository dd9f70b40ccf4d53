"""Exact minimiser of a weighted two-parameter check-loss objective.

Minimises ``f(a, b) = sum_t w_t rho_tau(y_t - a - b d_t)`` which is convex
and piecewise linear, with vertices where two observations with distinct
``d`` are interpolated.  The solver starts from ``b = 0`` and ``a`` the
weighted tau-quantile of ``y``.  If that point is not optimal it moves to
a vertex and then walks along edges: at a vertex the one-sided directional
derivative is linear between the rays that keep one interpolated
observation interpolated, so checking those rays certifies optimality.
Each edge step is an exact one-dimensional weighted quantile problem that
lands on another vertex with a strictly lower objective, so the walk
terminates.
"""

from __future__ import annotations

import numpy as np

from .exceptions import ConvergenceError

FLAT_RTOL = 1e-10
CERT_TOL = 1e-10
MAX_ITER = 500
_MAX_KINK_LINES = 64


def line_minimiser(z, v, qtotal: float, tie_fraction: float) -> float:
    """Minimise ``g(s) = sum_t v_t rho_{tau_t}(z_t - s)`` over ``s``.

    ``qtotal`` is ``sum_t v_t tau_t``.  The right slope of ``g`` after the
    ``k`` smallest ``z`` equals ``cumsum(v)_k - qtotal``; the minimiser is
    the first breakpoint where that slope turns non-negative.  When the
    slope there is zero (to ``FLAT_RTOL``) the minimisers form an interval
    and the point ``tie_fraction`` of the way across it is returned.
    """
    order = np.argsort(z, kind="stable")
    zs = z[order]
    vs = v[order]
    uz, first = np.unique(zs, return_index=True)
    cum = np.cumsum(np.add.reduceat(vs, first))
    tol = FLAT_RTOL * cum[-1]
    k = int(np.searchsorted(cum, qtotal - tol, side="left"))
    k = min(k, len(uz) - 1)
    if abs(cum[k] - qtotal) <= tol and k + 1 < len(uz):
        return float(uz[k] + tie_fraction * (uz[k + 1] - uz[k]))
    return float(uz[k])


def weighted_quantile(y, w, tau: float) -> float:
    """Minimiser of ``sum w_t rho_tau(y_t - a)``; ties split at ``1 - tau``."""
    y = np.asarray(y, dtype=float)
    w = np.asarray(w, dtype=float)
    return line_minimiser(y, w, tau * w.sum(), 1.0 - tau)


def _objective(r, w, tau):
    return float(w @ (r * (tau - (r < 0))))


def _kink_lines(d, zero, wn):
    dz = np.unique(d[zero])
    if len(dz) > _MAX_KINK_LINES:
        heavy = np.argsort(-wn[zero], kind="stable")
        dz = np.unique(d[zero][heavy][:_MAX_KINK_LINES])
    return dz


def _along(dz):
    """Directions ``(-d_j, 1)`` and their negatives: lines through each kink."""
    along = np.column_stack([-dz, np.ones_like(dz)])
    return np.vstack([along, -along])


def _derivatives(d, r, wn, tau, zero, dirs):
    c = dirs[:, 0][None, :] + d[:, None] * dirs[:, 1][None, :]
    psi = np.where(r < 0, tau - 1.0, tau)
    slope = np.where(zero[:, None], -c * (tau - (c > 0)), -c * psi[:, None])
    return wn @ slope, c


def _piece_gradients(r, d, wn, tau, zero):
    # with a single kink line the derivative is linear on either side of it;
    # the steepest direction of each linear piece completes the candidate set
    psi = np.where(r < 0, tau - 1.0, tau)
    design = np.column_stack([np.ones_like(d), d])
    smooth = -(wn * np.where(zero, 0.0, psi)) @ design
    kink = wn[zero] @ design[zero]
    # interpolated points all lie on the kink line, so they share the sign of c
    return np.array([-(smooth - (tau - 1.0) * kink), -(smooth - tau * kink)])


def _normalise(dirs, dscale):
    norm = np.abs(dirs[:, 0]) + dscale * np.abs(dirs[:, 1])
    ok = norm > 0
    return dirs[ok] / norm[ok][:, None]


def _line_step(d, r, wn, tau, direction, dscale, tie_fraction):
    va, vb = direction
    c = va + vb * d
    moving = np.abs(c) > 1e-14 * (abs(va) + abs(vb) * dscale)
    if not moving.any():
        return 0.0
    cm = c[moving]
    z = r[moving] / cm
    vv = wn[moving] * np.abs(cm)
    taus = np.where(cm > 0, tau, 1.0 - tau)
    return line_minimiser(z, vv, float(vv @ taus), tie_fraction)


def fit_check_line(d, y, w, tau: float):
    """Return ``(a, b, objective)`` minimising the weighted check loss.

    Weights are normalised internally; the returned objective uses the
    weights as given.
    """
    d = np.asarray(d, dtype=float)
    y = np.asarray(y, dtype=float)
    w = np.asarray(w, dtype=float)
    keep = w > 0
    if keep.sum() < len(w):
        d, y, w = d[keep], y[keep], w[keep]
    wn = w / w.sum()

    dscale = max(float(np.max(np.abs(d))), 1e-300)
    yscale = max(1.0, float(np.max(np.abs(y))))
    base = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])

    def zeros(a, b, r):
        return np.abs(r) <= 1e-12 * (yscale + abs(a) + abs(b) * dscale)

    def done(a, b):
        return a, b, _objective(y - a - b * d, w, tau)

    # the weighted quantile with b = 0 is often optimal already (always for
    # designs whose slope is zero); keep it so ties resolve as for quantiles
    a, b = weighted_quantile(y, wn, tau), 0.0
    r = y - a
    zero = zeros(a, b, r)
    dz = _kink_lines(d, zero, wn)
    if len(dz) == 0:
        dirs = base
    elif len(dz) == 1:
        dirs = np.vstack([base, _along(dz), _piece_gradients(r, d, wn, tau, zero)])
    else:
        dirs = np.vstack([base, _along(dz)])
    deriv, _ = _derivatives(d, r, wn, tau, zero, _normalise(dirs, dscale))
    if deriv.min() >= -CERT_TOL:
        return done(a, b)

    # move to a vertex without raising the objective: first onto a kink in a,
    # then along the line through that observation to a second one
    if len(dz) == 0:
        a = line_minimiser(y, wn, tau, 0.0)
        r = y - a
        zero = zeros(a, b, r)
    j = int(np.flatnonzero(zero)[np.argmax(wn[zero])])
    for direction in _normalise(_along(d[j:j + 1]), dscale):
        s = _line_step(d, r, wn, tau, direction, dscale, 0.0)
        a_new, b_new = a + s * direction[0], b + s * direction[1]
        r_new = y - a_new - b_new * d
        if _objective(r_new, wn, tau) <= _objective(r, wn, tau):
            a, b, r = a_new, b_new, r_new
        break
    f = _objective(r, wn, tau)

    for _ in range(MAX_ITER):
        zero = zeros(a, b, r)
        dz = _kink_lines(d, zero, wn)
        if len(dz) < 2:
            if np.ptp(d) == 0:
                return done(a, b)  # slope not identified
            dirs = np.vstack([base, _along(dz)])
        else:
            dirs = _along(dz)
        dirs = _normalise(dirs, dscale)
        deriv, _ = _derivatives(d, r, wn, tau, zero, dirs)
        best = int(np.argmin(deriv))
        if deriv[best] >= -CERT_TOL:
            return done(a, b)
        s = _line_step(d, r, wn, tau, dirs[best], dscale, 0.0)
        a_new, b_new = a + s * dirs[best][0], b + s * dirs[best][1]
        r_new = y - a_new - b_new * d
        f_new = _objective(r_new, wn, tau)
        if not f_new < f:
            break
        a, b, r, f = a_new, b_new, r_new, f_new

    raise ConvergenceError(
        f"check-loss fit stopped without optimality certificate (objective {f:.6g})"
    )


def directional_derivatives(d, y, w, tau, a, b, directions, rtol=1e-12):
    """One-sided derivatives of the weighted check objective at ``(a, b)``.

    Residuals within ``rtol`` (relative to the data scale) count as zero,
    so round-off in ``(a, b)`` does not flip their sign.
    """
    d = np.asarray(d, dtype=float)
    y = np.asarray(y, dtype=float)
    r = y - a - b * d
    scale = max(1.0, float(np.max(np.abs(y)))) + abs(a) + abs(b) * float(np.max(np.abs(d)))
    zero = np.abs(r) <= rtol * scale
    dirs = np.asarray(directions, dtype=float)
    c = dirs[:, 0][None, :] + d[:, None] * dirs[:, 1][None, :]
    psi = np.where(r < 0, tau - 1.0, tau)
    slope = np.where(zero[:, None], -c * (tau - (c > 0)), -c * psi[:, None])
    return np.asarray(w, dtype=float) @ slope
