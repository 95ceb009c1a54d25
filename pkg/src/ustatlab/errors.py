"""Exception hierarchy shared by all ustatlab modules."""

from __future__ import annotations


class UstatError(Exception):
    """Base class for every error raised by ustatlab."""


class ValidationError(UstatError, ValueError):
    """Input violates a documented precondition (bad shape, asymmetry, range)."""


class CapabilityError(UstatError):
    """Request is well formed but exceeds what exact enumeration can handle."""


class DegenerateKernelError(UstatError):
    """Kernel or statistic has zero variance, so standardization is undefined."""


class InapplicableConstructionError(UstatError):
    """An exchangeable-pair construction or bound does not apply to this kernel."""


class NonNormalRegimeError(UstatError):
    """Principal support graphs are disconnected; the normal limit does not hold."""


class DegenerateFitError(UstatError):
    """Log-log rate fit is impossible (a zero distance, or fewer than two points)."""


class ParseError(UstatError, ValueError):
    """Malformed input file. Carries the 1-based line and column of the fault."""

    def __init__(self, message: str, line: int = 0, column: int = 0, source: str = ""):
        self.line = line
        self.column = column
        self.source = source
        where = f"{source or '<input>'}:{line}:{column}"
        super().__init__(f"{where}: {message}")
