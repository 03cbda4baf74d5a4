"""Exception hierarchy shared by every app."""


class BicopulaError(Exception):
    """Base class for all errors raised by this project."""


class DomainError(BicopulaError, ValueError):
    """An argument lies outside the domain of the function."""


class InfeasibleError(BicopulaError, ValueError):
    """No parameter value satisfies the requested target."""


class ConvergenceError(BicopulaError):
    """An iterative routine ran out of steps."""


class NonFiniteError(BicopulaError, ArithmeticError):
    def __init__(self, message, coordinate=None):
        super().__init__(message)
        self.coordinate = coordinate


class InvalidRecordError(BicopulaError, ValueError):
    def __init__(self, message, record_id=None):
        super().__init__(message)
        self.record_id = record_id


class DegenerateDataError(BicopulaError, ValueError):
    """The data carry no information about the requested quantity."""


class SingularInformationError(BicopulaError, ArithmeticError):
    def __init__(self, message, condition_number=None):
        super().__init__(message)
        self.condition_number = condition_number


class FingerprintMismatchError(BicopulaError, ValueError):
    """A null fit is being reused on a dataset it was not fitted to."""


class DataFormatError(BicopulaError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f'line {line}: {message}'
        super().__init__(message)
        self.line = line


class RangeError(DomainError):
    """A time point lies outside the fitted sieve range."""


class LayoutError(BicopulaError, ValueError):
    """A parameter vector does not match its layout."""
