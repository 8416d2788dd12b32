"""Exception types raised across solitonlab."""


class SolitonLabError(Exception):
    """Base class for all library errors."""


class SingularMatrix(SolitonLabError):
    pass


class InvalidRange(SolitonLabError, ValueError):
    pass


class InvalidInput(SolitonLabError, ValueError):
    pass


class Overflow(SolitonLabError, ArithmeticError):
    """Exponent of a soliton factor exceeded the evaluation clamp."""


class SingularPoint(SolitonLabError):
    """Point evaluation landed on (or numerically at) a pole of the field."""


class StencilOnSingularity(SolitonLabError):
    pass


class NonDecayedBoundary(SolitonLabError):
    pass


class BoundaryNotDecayed(SolitonLabError):
    pass


class StepTooCoarse(SolitonLabError):
    pass


class NoConvergence(SolitonLabError):
    pass


class LeftUpperHalfPlane(SolitonLabError):
    pass


class SingularSample(SolitonLabError):
    pass


class NotPowerOfTwo(SolitonLabError, ValueError):
    pass


class ConfigInvalid(SolitonLabError, ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
