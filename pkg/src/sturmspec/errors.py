"""Exception types shared across the package."""


class SturmSpecError(Exception):
    """Base class for all package-specific failures."""


class StructuralError(SturmSpecError):
    """Band isolation found the wrong child count after all escalations."""


class PrecisionError(SturmSpecError):
    """The precision ladder was exhausted before a band was resolvable."""


class BudgetError(SturmSpecError):
    """An enumeration budget was exceeded; carries partial progress."""

    def __init__(self, message, count=None):
        super().__init__(message)
        self.count = count


class InvariantError(SturmSpecError):
    """A proven inequality failed numerically, indicating a numeric fault."""


class ConvergenceError(SturmSpecError):
    """An iterative solver did not converge within its iteration bound."""
