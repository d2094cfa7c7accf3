from collections.abc import Mapping
from types import MappingProxyType
from typing import Final

import pydantic

from swankv.application.common.exceptions.acceptance import AcceptanceCheckError
from swankv.application.common.exceptions.base import ApplicationError
from swankv.domain.exceptions.base import DomainError, DomainFieldError
from swankv.domain.exceptions.numerics import RejectedConfigurationError
from swankv.infrastructure.exceptions.base import InfrastructureError
from swankv.infrastructure.exceptions.storage import FormatError, StorageError

EXIT_OK: Final[int] = 0
EXIT_FAILURE: Final[int] = 1
EXIT_INVALID: Final[int] = 2
EXIT_IO: Final[int] = 3
EXIT_ACCEPTANCE: Final[int] = 4

ERROR_EXIT_MAPPING: Final[Mapping[type[Exception], int]] = MappingProxyType({
    # 2
    DomainFieldError: EXIT_INVALID,
    RejectedConfigurationError: EXIT_INVALID,
    pydantic.ValidationError: EXIT_INVALID,
    # 3
    StorageError: EXIT_IO,
    FormatError: EXIT_IO,
    # 4
    AcceptanceCheckError: EXIT_ACCEPTANCE,
    # 1
    DomainError: EXIT_FAILURE,
    ApplicationError: EXIT_FAILURE,
    InfrastructureError: EXIT_FAILURE,
})


def resolve_exit_code(exc: Exception) -> int:
    """Exact type first, then the nearest mapped base class."""
    for cls in type(exc).__mro__:
        code = ERROR_EXIT_MAPPING.get(cls)
        if code is not None:
            return code
    return EXIT_FAILURE
