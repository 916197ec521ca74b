"""Exception types shared across the engine."""


class PadynError(Exception):
    pass


class InvalidParams(PadynError, ValueError):
    """Map parameters violate c != 0 or d^2 - acd + bc^2 != 0."""


class PoleHit(PadynError, ArithmeticError):
    def __init__(self, pole, message=None):
        self.pole = pole
        super().__init__(message or f"evaluation at the pole x = {pole}")


class NeedsTower(PadynError, ArithmeticError):
    """An operation would need a second, incompatible quadratic extension."""


class PrecisionExhausted(PadynError, ArithmeticError):
    """Tracked p-adic precision can no longer separate the values involved."""


class StarValueRequired(PadynError):
    """A breakpoint radius was reached but no orbit-dependent value was supplied."""


class SpecConstraintError(PadynError, ValueError):
    pass
