"""Exception types shared across the package."""


class GtailError(Exception):
    """Base class for all package errors."""


class DomainError(GtailError, ValueError):
    """An argument lies outside the domain of the requested operation."""


class ConvergenceError(GtailError, RuntimeError):
    """A requested tolerance could not be reached within the allowed work."""


class AccuracyError(GtailError, RuntimeError):
    """A discretization is too coarse to deliver the requested accuracy."""
