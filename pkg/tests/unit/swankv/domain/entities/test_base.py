from dataclasses import dataclass

import pytest

from swankv.domain.entities.base import Entity
from swankv.domain.exceptions.base import DomainError
from swankv.domain.value_objects.cache_slot import CacheSlot


@dataclass(eq=False, slots=True)
class SampleEntity(Entity[CacheSlot]):
    name: str


def test_setattr():
    entity = SampleEntity(id_=CacheSlot(0, 1), name="abc")

    with pytest.raises(DomainError):
        entity.id_ = CacheSlot(0, 2)


def test_eq_hash():
    entity_1 = SampleEntity(id_=CacheSlot(0, 1), name="abc")
    entity_2 = SampleEntity(id_=CacheSlot(0, 1), name="def")

    assert entity_1 == entity_2
    assert id(entity_1) != id(entity_2)
    assert hash(entity_1) == hash(entity_2)

    entity_3 = SampleEntity(id_=CacheSlot(1, 1), name="abc")

    assert entity_1 != entity_3
    assert hash(entity_1) != hash(entity_3)
