from dataclasses import dataclass

from swankv.domain.enums.precision import Precision
from swankv.domain.exceptions.numerics import RejectedInputError
from swankv.domain.value_objects.base import ValueObject


@dataclass(frozen=True, repr=False, kw_only=True)
class CacheParams(ValueObject):
    """
    Compression knobs of a hybrid cache: retained dimensions for keys and
    values, dense recency buffer length and storage precision.

    raises RejectedInputError
    """

    k_key: int
    k_value: int
    buffer: int
    precision: Precision = Precision.FP16

    def __post_init__(self) -> None:
        """
        :raises RejectedInputError:
        """
        super().__post_init__()

        if self.k_key < 0 or self.k_value < 0:
            raise RejectedInputError("Retained dimensions must be >= 0.")
        if self.buffer < 0:
            raise RejectedInputError("Buffer size must be >= 0.")

    def check_head_dim(self, d_h: int) -> None:
        """
        :raises RejectedInputError:
        """
        if self.k_key > d_h or self.k_value > d_h:
            raise RejectedInputError(
                f"Retained dimensions ({self.k_key}, {self.k_value}) "
                f"exceed head dimension {d_h}.",
            )

    @classmethod
    def lossless(cls, d_h: int, buffer: int = 0) -> "CacheParams":
        """No pruning, f32 storage."""
        return cls(k_key=d_h, k_value=d_h, buffer=buffer, precision=Precision.F32)
