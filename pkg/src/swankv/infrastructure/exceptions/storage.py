from swankv.infrastructure.exceptions.base import InfrastructureError


class StorageError(InfrastructureError):
    """Reading or writing a file failed."""


class FormatError(InfrastructureError):
    """A file was read but its contents are not a valid encoding."""
