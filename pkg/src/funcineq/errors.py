"""Exception hierarchy shared by all modules."""


class FuncIneqError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(FuncIneqError, ValueError):
    """An argument is outside its admissible range."""


class DegenerateDensityError(FuncIneqError):
    """A density vanishes, underflows, or cannot be normalized."""


class TruncationError(FuncIneqError):
    """The numerical support of a density is too small for the requested operation."""


class AccuracyError(FuncIneqError):
    """A self-estimated discretization error exceeds its budget."""


class PreconditionError(FuncIneqError):
    """A hypothesis required by an inequality check does not hold."""


class MapError(FuncIneqError):
    """A transport map is not strictly increasing where it must be."""


class SizeError(FuncIneqError):
    """A brute-force routine was asked to handle too large an instance."""
