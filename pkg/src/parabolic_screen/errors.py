"""Exception and warning types shared across the package."""


class ParabolicScreenError(Exception):
    """Base class for all package errors."""


class DomainError(ParabolicScreenError, ValueError):
    """An argument lies outside the domain of an operation."""


class PoleError(DomainError):
    """Evaluation requested exactly at a pole (e.g. Li_{1/2}(1))."""


class DegenerateError(DomainError):
    """Degenerate grazing configuration (vanishing denominator)."""


class RegularizedPathRequired(DomainError):
    """The n = 0 transmission coefficient must use the derivative form."""


class ResonanceError(ParabolicScreenError, ArithmeticError):
    """Denominator of a lattice-sum closed form vanished."""


class NumericalError(ParabolicScreenError, ArithmeticError):
    """A numerical procedure failed to reach its tolerance.

    The best estimate obtained so far is kept in ``estimate``.
    """

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class ResolutionError(NumericalError):
    """Grid resolution is insufficient (aliasing monitor fired)."""


class ContractionError(NumericalError):
    """The quasi-periodic solver did not converge."""


class ConfigError(ParabolicScreenError, ValueError):
    """Invalid configuration; ``line`` points into the source text if known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidityWarning(UserWarning):
    """Parameters are outside the regime where an approximation is trusted."""


class TruncationWarning(UserWarning):
    """A truncated series has a tail estimate above tolerance."""


class ProbeWarning(UserWarning):
    """Probe-line extraction may be contaminated by evanescent orders."""
