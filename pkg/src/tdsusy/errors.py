"""Exception hierarchy shared by all modules."""


class TdsusyError(Exception):
    """Base class for library errors."""


class DomainError(TdsusyError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class UnsupportedParameterError(DomainError):
    """Parameter value the implementation does not cover (e.g. non half-integer lambda)."""


class CapabilityError(TdsusyError):
    """An oracle cannot supply the derivative order an operation needs."""


class SingularEvaluationError(TdsusyError):
    """Evaluation at or too close to a pole, node or singular time.

    ``locations`` holds the offending coordinates when known.
    """

    def __init__(self, message, locations=()):
        super().__init__(message)
        self.locations = tuple(locations)


class PoleError(SingularEvaluationError):
    """The Wronskian of a chain vanishes, so the transformed potential has a pole."""


class DegenerateChainError(TdsusyError):
    """A chain whose seeds are linearly dependent or otherwise unusable."""


class RealityViolationError(TdsusyError):
    """The transformed potential would not be real (phase not quadratic in x)."""


class AccuracyError(TdsusyError):
    """A numerical procedure failed to reach the requested accuracy."""


class BoxTooSmallError(TdsusyError):
    """Wavefunction amplitude reached the truncated box edge."""
