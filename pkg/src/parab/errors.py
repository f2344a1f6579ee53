"""Exception hierarchy shared by every module."""


class ParabError(Exception):
    """Base class for all library errors."""


class DomainError(ParabError, ArithmeticError):
    """An interval operation left its mathematical domain (e.g. division by 0)."""


class FormatError(ParabError, ValueError):
    """Malformed textual or binary input."""


class UsageError(ParabError, ValueError):
    """Inconsistent arguments passed by the caller."""


class ConfigError(UsageError):
    """Invalid run configuration."""


class SolverError(ParabError):
    """The non-rigorous solver failed to converge.

    ``domain`` is the 1-based index of the time subdomain (the infinite
    step counts as the last one).
    """

    def __init__(self, message, domain=None):
        super().__init__(message)
        self.domain = domain


class DiagonalizationError(ParabError):
    """The eigendecomposition of a linear block could not be enclosed."""

    def __init__(self, message, domain=None):
        super().__init__(message)
        self.domain = domain


class BoundFailure(ParabError):
    """A bound could not be made finite or small enough."""

    def __init__(self, message, domain=None):
        super().__init__(message)
        self.domain = domain


class StabilityError(ParabError):
    """The linearization on the infinite piece is not strictly stable."""


class ContractFailure(ParabError):
    """The radii polynomial inequalities could not be verified.

    ``domain`` points at the first failing subdomain.
    """

    def __init__(self, message, domain=None):
        super().__init__(message)
        self.domain = domain


class GapFailure(ParabError):
    """No spectral gap could be verified for the steady state."""


class BasinFailure(ParabError):
    """No positive basin radius could be verified around the steady state."""
