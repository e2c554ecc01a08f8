"""Exception types shared across the package."""


class BasisSelectError(Exception):
    """Base class for every error raised by this package."""


class InvalidConfigurationError(BasisSelectError, ValueError):
    """A constructor argument or configuration object is unusable."""


class OutOfDomainError(BasisSelectError, ValueError):
    """Evaluation points fall outside the basis domain."""


class DomainError(BasisSelectError, ValueError):
    """A parameter value lies outside its mathematical domain."""


class DegenerateCurveError(BasisSelectError, ValueError):
    """A curve carries no usable variation."""


class DegenerateChainError(BasisSelectError, ValueError):
    """A chain has zero within-chain variance, so scale reduction is undefined."""


class ImproperConditionalError(BasisSelectError, RuntimeError):
    """A full conditional got a nonpositive shape or rate and cannot be drawn."""


class LinearAlgebraError(BasisSelectError, RuntimeError):
    """A matrix factorization failed beyond recovery."""


class UndefinedMetricError(BasisSelectError, ValueError):
    """The fit metric is undefined for these dimensions."""


class UndefinedGCVError(BasisSelectError, ValueError):
    """The GCV denominator vanished or went negative."""


class ParseError(BasisSelectError, ValueError):
    """Malformed input file. Carries the 1-based line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
