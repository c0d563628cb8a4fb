"""Exception hierarchy. Every error raised on purpose derives from ``VnaError``."""


class VnaError(Exception):
    pass


class InvalidDimensionError(VnaError, ValueError):
    pass


class ShapeError(VnaError, ValueError):
    pass


class DecompositionError(VnaError):
    """Raised when a block decomposition or an ensemble fails to reconstruct.

    ``residual`` carries the offending size when one is available.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class SupportError(VnaError):
    pass


class DomainError(VnaError, ValueError):
    pass


class ParameterError(VnaError, ValueError):
    pass


class ValidityError(VnaError):
    pass


class DegenerateInputError(VnaError, ValueError):
    pass


class NotApplicableError(VnaError):
    pass


class NoExpectationError(VnaError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class StandardnessError(VnaError):
    pass


class ScopeError(VnaError):
    pass


class StaleDecompositionError(VnaError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class LimitError(VnaError, ValueError):
    pass
