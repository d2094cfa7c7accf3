from dataclasses import dataclass

import numpy as np
import pytest

from swankv.domain.exceptions.base import DomainFieldError
from swankv.domain.value_objects.base import ValueObject


@dataclass(frozen=True, slots=True, repr=False)
class SingleFieldValueObject(ValueObject):
    value: int


@dataclass(frozen=True, slots=True, repr=False)
class MultiFieldValueObject(ValueObject):
    value1: int
    value2: str


@dataclass(frozen=True, repr=False, eq=False)
class ArrayValueObject(ValueObject):
    data: np.ndarray

    def __post_init__(self) -> None:
        super().__post_init__()
        self._freeze("data", np.asarray(self.data, dtype=np.float32).copy())


def test_post_init():
    with pytest.raises(DomainFieldError):
        ValueObject()


def test_repr():
    vo_1 = SingleFieldValueObject(value=123)

    assert repr(vo_1) == "SingleFieldValueObject(123)"

    vo_2 = MultiFieldValueObject(value1=123, value2="abc")

    assert repr(vo_2) == "MultiFieldValueObject(value1=123, value2='abc')"

    vo_3 = ArrayValueObject(np.zeros((2, 3)))

    assert repr(vo_3) == "ArrayValueObject(<float32 (2, 3)>)"


def test_get_fields():
    vo = MultiFieldValueObject(value1=123, value2="abc")

    assert vo.get_fields() == {"value1": 123, "value2": "abc"}


def test_array_fields_are_frozen_copies():
    source = np.arange(4, dtype=np.float32)
    vo = ArrayValueObject(source)
    source[0] = 42.0

    assert vo.data[0] == 0.0
    with pytest.raises(ValueError):
        vo.data[0] = 1.0


def test_array_eq_hash():
    vo_1 = ArrayValueObject(np.arange(4))
    vo_2 = ArrayValueObject(np.arange(4))
    vo_3 = ArrayValueObject(np.arange(1, 5))

    assert vo_1 == vo_2
    assert hash(vo_1) == hash(vo_2)
    assert vo_1 != vo_3
