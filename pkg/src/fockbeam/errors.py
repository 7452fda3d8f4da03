"""Exception hierarchy shared by the engines and mapped to CLI exit codes."""


class FockBeamError(Exception):
    """Base class for all package errors."""


class DomainError(FockBeamError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class RegimeError(FockBeamError, ValueError):
    """An engine was asked to work outside the regime it is defined for."""


class EdgeError(FockBeamError, ArithmeticError):
    """A closed form diverges or is undefined at the edge |x| = 1."""


class NumericalError(FockBeamError, ArithmeticError):
    """A numerical procedure failed to reach its accuracy target."""


class ResourceLimitError(FockBeamError, RuntimeError):
    """A dense computation would exceed its declared size bound."""
