from dataclasses import dataclass

from swankv.domain.enums.precision import Precision
from swankv.domain.exceptions.numerics import RejectedInputError
from swankv.domain.value_objects.base import ValueObject
from swankv.domain.value_objects.sparse_vector import SPARSE_OFFSET_BYTES


@dataclass(frozen=True, repr=False, kw_only=True)
class MemoryModel(ValueObject):
    """
    Closed-form per-vector storage cost:
    sparse = (value_bytes + 1)·k + 2, dense = d_h·storage width,
    i.e. 3k + 2 vs. 2·d_h for fp16 and 2k + 2 for fp8.

    raises RejectedInputError
    """

    d_h: int
    k_active: int
    precision: Precision

    def __post_init__(self) -> None:
        """
        :raises RejectedInputError:
        """
        super().__post_init__()

        if not 0 <= self.k_active <= self.d_h:
            raise RejectedInputError(
                f"k_active must lie in [0, {self.d_h}], got {self.k_active}.",
            )

    @property
    def bytes_per_sparse_vector(self) -> int:
        return (
            self.precision.value_bytes + 1
        ) * self.k_active + SPARSE_OFFSET_BYTES

    @property
    def bytes_per_dense_vector(self) -> int:
        return self.d_h * self.precision.dense_bytes

    @property
    def compression_ratio(self) -> float:
        return self.bytes_per_sparse_vector / self.bytes_per_dense_vector

    @property
    def retention(self) -> float:
        return self.k_active / self.d_h
