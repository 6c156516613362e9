"""Exception hierarchy for the Bohm potential lab.

Two families:
- DomainError (a ValueError): the inputs do not describe a valid problem
  (bad grid, mismatched grids, no bound state, domain too small, bad CSV).
- NumericalError (an ArithmeticError): the inputs were valid but the numerics
  failed (node-count mismatch, runaway growth, Airy overflow).

The CLI maps DomainError to exit code 2 (input) or 3 (solver), and
NumericalError to exit code 3.
"""

from typing import Optional


class BohmLabError(Exception):
    """Base class for all errors raised by bohm_lab."""


class DomainError(BohmLabError, ValueError):
    """Invalid input: bounds, point counts, grid mismatch, unsupported n."""


class NormalizationError(DomainError):
    """Amplitude has zero or non-finite norm."""


class NoBoundStateError(DomainError):
    """The requested state does not lie below the continuum edge."""

    def __init__(self, message: str, n: int, continuum_edge: float) -> None:
        super().__init__(message)
        self.n = n
        self.continuum_edge = continuum_edge


class DomainTooSmallError(DomainError):
    """The bound state has not decayed at the grid edge."""

    def __init__(self, message: str, edge_amplitude: float) -> None:
        super().__init__(message)
        self.edge_amplitude = edge_amplitude


class NoDiscreteEnergyError(DomainError):
    """Continuum families (step, linear) have no discrete energy."""


class InsufficientDataError(DomainError):
    """Too many samples were excluded to produce a meaningful statistic."""


class NumericalError(BohmLabError, ArithmeticError):
    """Base class for numerical failures."""


class SolverError(NumericalError):
    """Eigensolver failure: node-count mismatch or inverse iteration breakdown."""


class GrowthError(NumericalError):
    """Initial-value integration overflowed."""

    def __init__(self, message: str, last_valid_x: Optional[float]) -> None:
        super().__init__(message)
        self.last_valid_x = last_valid_x


class AiryRangeError(NumericalError):
    """Bi requested beyond the representable range."""
