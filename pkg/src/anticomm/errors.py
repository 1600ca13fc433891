"""Exception types shared across the package."""


class AnticommError(Exception):
    """Base class for all package errors."""


class WidthMismatchError(AnticommError, ValueError):
    pass


class DenseCapError(AnticommError, ValueError):
    """Raised when a dense matrix is requested above the configured qubit cap."""


class ParseError(AnticommError, ValueError):
    def __init__(self, message, line_no=None, source=None):
        self.line_no = line_no
        self.source = source
        where = ""
        if source is not None:
            where += f"{source}:"
        if line_no is not None:
            where += f"{line_no}: "
        elif where:
            where += " "
        super().__init__(f"{where}{message}")


class EmptyHamiltonianError(AnticommError, ValueError):
    pass


class NonHermitianError(AnticommError, ValueError):
    pass


class BudgetExceeded(AnticommError, RuntimeError):
    """Symbolic expansion would exceed the work budget; use the composite bound."""


class NotAnticommutingError(AnticommError, ValueError):
    pass


class MissingStructureError(AnticommError, ValueError):
    pass


class FormulaDomainError(AnticommError, ValueError):
    pass
