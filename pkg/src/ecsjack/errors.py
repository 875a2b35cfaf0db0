"""Exception hierarchy shared by all modules."""


class EcsError(Exception):
    """Base class for every error raised by ecsjack."""


class DomainError(EcsError, ValueError):
    """An argument lies outside the domain of the function."""


class SingularityError(EcsError, ArithmeticError):
    """Evaluation too close to a zero or pole."""


class ScheduleError(EcsError, ValueError):
    """A contour radius schedule violates its annulus constraints."""


class DimensionError(EcsError, ValueError):
    """Requested quadrature dimension exceeds the configured budget."""


class EvaluationError(EcsError, ArithmeticError):
    """An integrand or sampled function returned a non-finite value."""


class DegeneracyError(EcsError, ArithmeticError):
    """Two eigenvalues of the Jack triangular solve collide."""


class UndefinedConstantError(EcsError, ValueError):
    """A normalisation constant is undefined for the given labels."""
