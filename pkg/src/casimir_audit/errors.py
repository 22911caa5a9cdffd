"""Exception hierarchy shared by the engine and the CLI."""


class CasimirError(Exception):
    """Base class for all package errors."""


class DomainError(CasimirError, ValueError):
    """An argument lies outside the domain of the operation."""


class StatisticsError(CasimirError, ValueError):
    """Screening length requested for the wrong carrier statistics."""


class SchemeError(CasimirError, ValueError):
    """Reflection scheme is not admissible for the material."""


class ConvergenceError(CasimirError, ArithmeticError):
    """Matsubara sum or quadrature failed to reach the requested tolerance."""


class SchemaError(CasimirError, ValueError):
    """Malformed configuration or measurement file."""
