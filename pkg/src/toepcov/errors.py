"""Exception and warning types raised across the package."""


class ToepcovError(Exception):
    """Base class for all package errors."""


class InvalidInput(ToepcovError, ValueError):
    pass


class NumericalFailure(ToepcovError, ArithmeticError):
    pass


class NotPositiveSemidefinite(ToepcovError, ValueError):
    pass


class NotPositiveDefinite(ToepcovError, ValueError):
    pass


class DegenerateInput(ToepcovError, ValueError):
    pass


class UnsupportedRegime(ToepcovError, ValueError):
    """Raised when the sample count does not exceed the dimension."""


class DegenerateProjection(ToepcovError, ArithmeticError):
    pass


class SingularSensitivity(ToepcovError, ArithmeticError):
    """The eigenvalue sensitivity matrix has no usable rank."""


class DegenerateSpectrum(ToepcovError, ArithmeticError):
    """A prediction polynomial has a root on (or too close to) the unit circle."""


class ParseError(ToepcovError, ValueError):
    def __init__(self, message, *, line=None, field=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.line = line
        self.field = field


class BoundaryRootWarning(UserWarning):
    pass


class NoFlatSubspaceWarning(UserWarning):
    pass
