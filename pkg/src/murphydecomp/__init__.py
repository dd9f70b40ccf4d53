"""Murphy decomposition of expected forecast loss.

The mean score of a forecast series splits into uncertainty (UNC),
resolution (RES) and miscalibration (CAL)::

    score = UNC - RES + CAL

for squared error (mean forecasts) and check loss (quantile forecasts),
with the conditional functional estimated by local linear kernel
regression.
"""

__version__ = "0.1.0"

from .decomp import (
    CalibrationCurve,
    DecompositionResult,
    ForecastSeries,
    calibration_curve,
    estimate_by_horizon,
    estimate_decomposition,
    normalized_resolution,
)
from .exceptions import (
    BandwidthSelectionError,
    ConvergenceError,
    DegenerateNeighborhoodError,
    DomainError,
    EstimationError,
    InputError,
    InsufficientDataError,
    MurphyError,
    ParameterRangeError,
)
from .kernelreg import KernelFitConfig, cv_bandwidth, fit_local_linear, local_linear
from .scoring import LossKind, LossSpec, NormalParams

__all__ = [
    "__version__",
    "BandwidthSelectionError",
    "CalibrationCurve",
    "ConvergenceError",
    "DecompositionResult",
    "DegenerateNeighborhoodError",
    "DomainError",
    "EstimationError",
    "ForecastSeries",
    "InputError",
    "InsufficientDataError",
    "KernelFitConfig",
    "LossKind",
    "LossSpec",
    "MurphyError",
    "NormalParams",
    "ParameterRangeError",
    "calibration_curve",
    "cv_bandwidth",
    "estimate_by_horizon",
    "estimate_decomposition",
    "fit_local_linear",
    "local_linear",
    "normalized_resolution",
]
