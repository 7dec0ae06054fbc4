"""Exception hierarchy for the exterior decay lab.

Each error carries the process exit code the CLI maps it to:
2 for configuration problems, 3 for numerical non-convergence and
1 for everything else.
"""
from typing import List, Optional


class LabError(Exception):
    """Base class for all lab errors."""
    exit_code = 1


class ConfigurationError(LabError):
    """Invalid experiment configuration or domain specification.

    Attributes:
        field: Dotted name of the offending field, if known
    """
    exit_code = 2

    def __init__(self, message: str, field: Optional[str] = None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class NonFiniteSampleError(LabError):
    """A sampled function returned NaN or inf at a grid node."""

    def __init__(self, radius: float, angle: float, value: float):
        self.radius = radius
        self.angle = angle
        self.value = value
        super().__init__(f"non-finite sample {value!r} at node r={radius:.6g}, theta={angle:.6g}")


class AssemblyError(LabError):
    """Degenerate cell metrics or coefficients during operator assembly."""

    def __init__(self, message: str, cell: Optional[tuple] = None):
        self.cell = cell
        super().__init__(f"{message} (cell {cell})" if cell is not None else message)


class ConvergenceError(LabError):
    """Krylov solve did not reach the requested tolerance.

    Attributes:
        history: Relative residual history across all attempts
    """
    exit_code = 3

    def __init__(self, message: str, history: Optional[List[float]] = None):
        self.history = list(history or [])
        super().__init__(message)


class ExtractionError(LabError):
    """Contour chaining produced an open chain away from the boundary."""


class PreconditionError(LabError):
    """A verification operation was called outside its preconditions."""


class DecayFitError(LabError):
    """The decay fit window is empty or contains non-positive values."""


class MissingArtifactsError(LabError):
    """A run directory lacks files a command needs.

    Attributes:
        missing: Names of the absent files
    """

    def __init__(self, directory: str, missing: List[str]):
        self.missing = list(missing)
        super().__init__(f"{directory} is missing {', '.join(self.missing)}")
