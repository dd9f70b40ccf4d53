"""Stylised forecasters of a latent-mean normal model, plus closed forms.

The outcome is ``Y_t = mu_t + eps_t`` with ``mu_t, eps_t ~ iid N(0, 1)``.
Six forecasters differ in what they know about ``mu_t``:

=====  ==============================  ============================
kind   mean forecast                   predictive distribution
=====  ==============================  ============================
unc    0                               N(0, 2)
inf    mu                              N(mu, 1)
sr     -mu                             N(-mu, 1)
ni     mu + nu                         N(mu + nu, 1)
rec    (mu + nu) / (1 + s2)            N((mu + nu)/(1 + s2), 1 + s2/(1 + s2))
perf   y                               point mass at y
=====  ==============================  ============================

with ``nu ~ N(0, s2)`` independent of everything else.

Random numbers come from numpy's PCG64 generator.  A root
``SeedSequence(seed)`` is spawned into three child streams, used for
``mu``, ``eps`` and ``nu`` in that order, so the draws for one variable do
not depend on which forecaster is simulated.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .exceptions import DomainError
from .scoring import LOG_2PI


class Forecaster(str, enum.Enum):
    UNC = "unc"
    INF = "inf"
    SR = "sr"
    NI = "ni"
    REC = "rec"
    PERF = "perf"


_NOISY = (Forecaster.NI, Forecaster.REC)


@dataclass(frozen=True)
class ForecasterKind:
    kind: Forecaster
    sigma_nu2: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Forecaster(self.kind))
        if self.kind in _NOISY:
            if self.sigma_nu2 is None:
                raise DomainError(f"{self.kind.value} forecaster needs a noise variance")
            if not (math.isfinite(self.sigma_nu2) and self.sigma_nu2 >= 0):
                raise DomainError(f"noise variance must be >= 0, got {self.sigma_nu2!r}")
            object.__setattr__(self, "sigma_nu2", float(self.sigma_nu2))
        elif self.sigma_nu2 is not None:
            raise DomainError(f"{self.kind.value} forecaster takes no noise variance")


@dataclass(frozen=True)
class SimulatedPanel:
    mu: np.ndarray
    y: np.ndarray
    mean_forecast: np.ndarray
    pred_mu: np.ndarray
    pred_sigma2: np.ndarray

    def __len__(self):
        return len(self.y)


class Decomposition(NamedTuple):
    score: float
    unc: float
    res: float
    cal: float


def _streams(seed: int):
    children = np.random.SeedSequence(seed).spawn(3)
    return [np.random.Generator(np.random.PCG64(c)) for c in children]


def simulate(f: ForecasterKind, n: int, seed: int) -> SimulatedPanel:
    """Draw ``n`` forecast/outcome pairs for forecaster ``f``.

    For ``perf`` the predictive variance column holds 0 as a sentinel;
    it has no finite log score.
    """
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    g_mu, g_eps, g_nu = _streams(seed)
    mu = g_mu.standard_normal(n)
    y = mu + g_eps.standard_normal(n)
    k = f.kind
    if k is Forecaster.UNC:
        mean = np.zeros(n)
        pmu, ps2 = mean, np.full(n, 2.0)
    elif k is Forecaster.INF:
        mean = mu.copy()
        pmu, ps2 = mean, np.ones(n)
    elif k is Forecaster.SR:
        mean = -mu
        pmu, ps2 = mean, np.ones(n)
    elif k is Forecaster.NI:
        mean = mu + math.sqrt(f.sigma_nu2) * g_nu.standard_normal(n)
        pmu, ps2 = mean, np.ones(n)
    elif k is Forecaster.REC:
        s2 = f.sigma_nu2
        mean = (mu + math.sqrt(s2) * g_nu.standard_normal(n)) / (1.0 + s2)
        pmu, ps2 = mean, np.full(n, 1.0 + s2 / (1.0 + s2))
    else:
        mean = y.copy()
        pmu, ps2 = mean, np.zeros(n)
    return SimulatedPanel(mu=mu, y=y, mean_forecast=mean, pred_mu=pmu.copy(), pred_sigma2=ps2)


def analytic_mse_decomposition(f: ForecasterKind) -> Decomposition:
    """Population (MSE, UNC, RES, CAL) under squared error."""
    k = f.kind
    if k is Forecaster.UNC:
        return Decomposition(2.0, 2.0, 0.0, 0.0)
    if k is Forecaster.INF:
        return Decomposition(1.0, 2.0, 1.0, 0.0)
    if k is Forecaster.SR:
        return Decomposition(5.0, 2.0, 1.0, 4.0)
    if k is Forecaster.PERF:
        return Decomposition(0.0, 2.0, 2.0, 0.0)
    s2 = f.sigma_nu2
    res = 1.0 / (1.0 + s2)
    if k is Forecaster.NI:
        return Decomposition(1.0 + s2, 2.0, res, s2 * s2 / (1.0 + s2))
    return Decomposition(1.0 + s2 / (1.0 + s2), 2.0, res, 0.0)


def analytic_logscore_decomposition(f: ForecasterKind) -> Decomposition:
    """Population (MLS, UNC, RES, CAL) under the logarithmic score.

    ``perf`` returns the limiting row: zero score, all uncertainty resolved.
    The recalibrated forecaster issues the true conditional distribution
    ``N(., v)`` with ``v = 1 + s2/(1 + s2)``, so its score is that normal's
    entropy and its resolution equals the noisily informed forecaster's.
    """
    unc = 0.5 * (math.log(4.0 * math.pi) + 1.0)
    half_log2 = 0.5 * math.log(2.0)
    k = f.kind
    if k is Forecaster.UNC:
        return Decomposition(unc, unc, 0.0, 0.0)
    if k is Forecaster.INF:
        return Decomposition(0.5 * (LOG_2PI + 1.0), unc, half_log2, 0.0)
    if k is Forecaster.SR:
        return Decomposition(0.5 * (LOG_2PI + 5.0), unc, half_log2, 2.0)
    if k is Forecaster.PERF:
        return Decomposition(0.0, unc, unc, 0.0)
    s2 = f.sigma_nu2
    log_v = math.log1p(s2 / (1.0 + s2))
    res = 0.5 * (math.log(2.0) - log_v)
    if k is Forecaster.NI:
        return Decomposition(0.5 * (LOG_2PI + 1.0 + s2), unc, res, 0.5 * (s2 - log_v))
    return Decomposition(0.5 * (LOG_2PI + log_v + 1.0), unc, res, 0.0)
