from swankv.domain.exceptions.base import DomainError, DomainFieldError


class RejectedInputError(DomainFieldError):
    """
    Raised when an operand is malformed: wrong shape, non-finite entries,
    empty where content is required, or an index outside its range.
    """


class RejectedConfigurationError(DomainError):
    """
    Raised when hyperparameters or attached artifacts are inconsistent with
    each other, e.g. an odd head dimension for RoPE, indivisible head counts,
    or a projection set built for another model.
    """


class RejectedStateError(DomainError):
    """
    Raised when an operation is invoked on an object whose current state
    does not allow it, e.g. attention over an empty cache or a cache whose
    stored values fail validation.
    """


class ShapeMismatchError(RejectedInputError):
    def __init__(self, what: str, expected: object, actual: object):
        message = f"{what}: expected shape {expected}, got {actual}."
        super().__init__(message)


class NonFiniteInputError(RejectedInputError):
    def __init__(self, what: str):
        message = f"{what} contains NaN or Inf entries."
        super().__init__(message)
