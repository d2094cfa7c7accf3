from dataclasses import dataclass

from swankv.domain.value_objects.base import ValueObject


@dataclass(frozen=True, repr=False, kw_only=True)
class CacheFootprint(ValueObject):
    """Stored bytes of one hybrid cache, broken down by structure."""

    sparse_k: int
    sparse_v: int
    buffer_k: int
    buffer_v: int

    @property
    def total(self) -> int:
        return self.sparse_k + self.sparse_v + self.buffer_k + self.buffer_v

    def __add__(self, other: "CacheFootprint") -> "CacheFootprint":
        return CacheFootprint(
            sparse_k=self.sparse_k + other.sparse_k,
            sparse_v=self.sparse_v + other.sparse_v,
            buffer_k=self.buffer_k + other.buffer_k,
            buffer_v=self.buffer_v + other.buffer_v,
        )
