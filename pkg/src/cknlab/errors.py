"""Exception types shared across the package."""


class CknLabError(Exception):
    """Base class for every error raised by cknlab."""


class ValidationError(CknLabError, ValueError):
    """Inputs rejected before any numerics run (maps to CLI exit code 2)."""


class NumericalError(CknLabError, ArithmeticError):
    """A numerical routine failed to deliver its contract (exit code 3)."""


class DomainError(ValidationError):
    pass


class InvalidParams(ValidationError):
    pass


class UnknownPreset(ValidationError):
    pass


class NonIntegrable(ValidationError):
    pass


class DegenerateNorm(ValidationError):
    pass


class ConstraintUnsatisfiable(ValidationError):
    pass


class FamilyClosure(ValidationError):
    pass


class GammaOverflow(NumericalError, OverflowError):
    pass


class NoConvergence(NumericalError):
    pass


class NotPositiveDefinite(NumericalError):
    pass
