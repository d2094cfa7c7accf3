from abc import ABC
from dataclasses import dataclass, fields
from typing import Any

import numpy as np

from swankv.domain.exceptions.base import DomainFieldError


@dataclass(frozen=True, repr=False)
class ValueObject(ABC):
    """
    Base class for immutable value objects (VO) in the domain.
    - Defined by its attributes, which must also be immutable.
    - Array-valued attributes are stored as read-only `numpy` arrays;
      subclasses freeze them in `__post_init__` via `_freeze`.
    - Subclasses should set `repr=False` to use the custom `__repr__`.
    - Subclasses holding arrays should set `eq=False` to inherit the
      element-wise `__eq__` and `__hash__` below.
    """

    def __post_init__(self) -> None:
        """
        Hook for additional initialization and ensuring invariants.

        Subclasses can override this method to implement custom logic, while
        still calling `super().__post_init__()` to preserve base checks.
        """
        if not fields(self):
            raise DomainFieldError(
                f"{type(self).__name__} must have at least one field!",
            )

    def __repr__(self) -> str:
        """
        - With 1 field: outputs the value only.
        - With 2+ fields: outputs in `name=value` format.
        Arrays are summarized by dtype and shape.
        """
        return f"{type(self).__name__}({self._repr_value()})"

    def _repr_value(self) -> str:
        all_fields = fields(self)
        if len(all_fields) == 1:
            return _short_repr(getattr(self, all_fields[0].name))
        return ", ".join(
            f"{f.name}={_short_repr(getattr(self, f.name))}" for f in all_fields
        )

    def _freeze(self, name: str, value: Any) -> None:
        """
        Replaces attribute `name` of a frozen instance with `value`.
        Used to store normalized, non-writeable copies of array inputs.
        """
        if hasattr(value, "setflags"):
            value.setflags(write=False)
        object.__setattr__(self, name, value)

    def __eq__(self, other: object) -> bool:
        if type(other) is not type(self):
            return NotImplemented
        return all(
            _value_equal(getattr(self, f.name), getattr(other, f.name))
            for f in fields(self)
        )

    def __hash__(self) -> int:
        return hash(tuple(_hashable(getattr(self, f.name)) for f in fields(self)))

    def get_fields(self) -> dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _short_repr(value: Any) -> str:
    if isinstance(value, np.ndarray):
        return f"<{value.dtype} {tuple(value.shape)}>"
    return repr(value)


def _value_equal(a: Any, b: Any) -> bool:
    if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
        return bool(np.array_equal(a, b))
    if isinstance(a, tuple) and isinstance(b, tuple):
        return len(a) == len(b) and all(map(_value_equal, a, b))
    return bool(a == b)


def _hashable(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return (value.dtype.str, value.shape, value.tobytes())
    if isinstance(value, tuple):
        return tuple(map(_hashable, value))
    return value
