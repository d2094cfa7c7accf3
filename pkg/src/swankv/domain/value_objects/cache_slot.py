from dataclasses import dataclass

from swankv.domain.exceptions.base import DomainFieldError
from swankv.domain.value_objects.base import ValueObject


@dataclass(frozen=True, repr=False)
class CacheSlot(ValueObject):
    """Identity of one hybrid cache: the (layer, KV-head) it serves."""

    layer: int
    kv_head: int

    def __post_init__(self) -> None:
        super().__post_init__()

        if self.layer < 0 or self.kv_head < 0:
            raise DomainFieldError("Cache slot indices must be >= 0.")
