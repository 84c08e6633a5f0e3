"""Exception hierarchy shared by every module."""


class SharpboundError(Exception):
    pass


class NotHermitian(SharpboundError, ValueError):
    pass


class DimensionMismatch(SharpboundError, ValueError):
    pass


class NonConvergence(SharpboundError, ArithmeticError):
    pass


class DomainViolation(SharpboundError, ValueError):
    """A spectral function was asked to act below its domain floor."""


class NotStrictlyPositive(DomainViolation):
    pass


class WeightOutOfRange(SharpboundError, ValueError):
    pass


class RepresentingFunctionDomain(SharpboundError, ValueError):
    pass


class InvalidMeanSpec(SharpboundError, ValueError):
    pass


class InvalidMapSpec(SharpboundError, ValueError):
    pass


class InvalidBounds(SharpboundError, ValueError):
    pass


class ParseError(SharpboundError, ValueError):
    """Malformed serialized input. ``where`` names the line or field."""

    def __init__(self, message, where=None):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)


class InvariantViolation(SharpboundError, ValueError):
    def __init__(self, message, bound=None, margin=None):
        self.bound = bound
        self.margin = margin
        super().__init__(message)
