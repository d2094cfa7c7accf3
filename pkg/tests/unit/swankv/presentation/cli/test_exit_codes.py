import pydantic
import pytest

from swankv.application.common.exceptions.acceptance import AcceptanceCheckError
from swankv.application.common.exceptions.base import ApplicationError
from swankv.domain.exceptions.base import DomainError
from swankv.domain.exceptions.numerics import (
    RejectedConfigurationError,
    RejectedInputError,
    RejectedStateError,
    ShapeMismatchError,
)
from swankv.infrastructure.exceptions.storage import FormatError, StorageError
from swankv.presentation.cli.exit_codes import (
    EXIT_ACCEPTANCE,
    EXIT_FAILURE,
    EXIT_INVALID,
    EXIT_IO,
    resolve_exit_code,
)


class Strict(pydantic.BaseModel):
    n: int


@pytest.mark.parametrize(
    ("exc", "expected"),
    [
        pytest.param(RejectedInputError("x"), EXIT_INVALID, id="input"),
        pytest.param(ShapeMismatchError("x", 1, 2), EXIT_INVALID, id="shape"),
        pytest.param(RejectedConfigurationError("x"), EXIT_INVALID, id="config"),
        pytest.param(StorageError("x"), EXIT_IO, id="storage"),
        pytest.param(FormatError("x"), EXIT_IO, id="format"),
        pytest.param(AcceptanceCheckError("x"), EXIT_ACCEPTANCE, id="acceptance"),
        pytest.param(RejectedStateError("x"), EXIT_FAILURE, id="state"),
        pytest.param(DomainError("x"), EXIT_FAILURE, id="domain"),
        pytest.param(ApplicationError("x"), EXIT_FAILURE, id="application"),
        pytest.param(RuntimeError("x"), EXIT_FAILURE, id="unmapped"),
    ],
)
def test_resolve_exit_code(exc, expected):
    assert resolve_exit_code(exc) == expected


def test_validation_error_is_invalid_input():
    with pytest.raises(pydantic.ValidationError) as info:
        Strict.model_validate({"n": "many"})

    assert resolve_exit_code(info.value) == EXIT_INVALID
