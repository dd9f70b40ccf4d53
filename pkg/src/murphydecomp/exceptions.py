"""Exception hierarchy shared across the package."""


class MurphyError(Exception):
    """Base class for all errors raised by :mod:`murphydecomp`."""


class DomainError(MurphyError, ValueError):
    """An argument lies outside the domain of the operation."""


class ParameterRangeError(DomainError):
    """Distribution parameters outside the family's admissible range."""


class InsufficientDataError(DomainError):
    """Too few observations for the requested computation."""


class DegenerateNeighborhoodError(MurphyError):
    """Kernel weight mass at an evaluation point is too small to fit."""

    def __init__(self, point: float, mass: float, threshold: float):
        self.point = point
        self.mass = mass
        self.threshold = threshold
        super().__init__(
            f"degenerate kernel neighbourhood at x={point:.6g}: "
            f"weight mass {mass:.3g} < {threshold:.3g}"
        )


class BandwidthSelectionError(MurphyError):
    """Every candidate bandwidth was degenerate."""


class EstimationError(MurphyError):
    """A model could not be estimated (e.g. singular design)."""


class ConvergenceError(MurphyError):
    """An optimiser stopped without an optimality certificate."""


class InputError(MurphyError):
    """Malformed tabular input; names the offending row and column."""

    def __init__(self, message: str, row=None, column=None):
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
