from swankv.application.common.exceptions.base import ApplicationError


class AcceptanceCheckError(ApplicationError):
    """A validate/check mode found the measured behavior outside its bound."""
