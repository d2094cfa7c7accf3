from dataclasses import dataclass
from typing import Final

import numpy as np
import numpy.typing as npt

from swankv.domain.enums.precision import Precision
from swankv.domain.exceptions.base import DomainFieldError
from swankv.domain.types import IndexArray
from swankv.domain.value_objects.base import ValueObject

# u16 element count / offset stored alongside every vector
SPARSE_OFFSET_BYTES: Final[int] = 2

STORAGE_DTYPES: Final[dict[Precision, np.dtype[np.generic]]] = {
    Precision.FP16: np.dtype(np.float16),
    Precision.FP8: np.dtype(np.uint8),
    Precision.F32: np.dtype(np.float32),
}


@dataclass(frozen=True, repr=False, eq=False)
class SparseVector(ValueObject):
    """
    Pruned head vector in per-vector CSR form: ascending u8 indices plus the
    retained values in their storage encoding (fp16 scalars, e4m3 codes or
    f32 scalars). Dimensions not listed are zero.

    raises DomainFieldError
    """

    indices: IndexArray
    values: npt.NDArray[np.generic]
    precision: Precision

    def __post_init__(self) -> None:
        """
        :raises DomainFieldError:
        """
        super().__post_init__()

        indices = np.asarray(self.indices)
        values = np.asarray(self.values)
        if indices.dtype != np.uint8 or indices.ndim != 1:
            raise DomainFieldError("Sparse indices must be a 1-D u8 array.")
        if values.dtype != STORAGE_DTYPES[self.precision] or values.ndim != 1:
            raise DomainFieldError(
                f"Sparse values must be a 1-D {STORAGE_DTYPES[self.precision]} "
                f"array for {self.precision}.",
            )
        if indices.size != values.size:
            raise DomainFieldError(
                f"Index count {indices.size} != value count {values.size}.",
            )
        if indices.size > 1 and (np.diff(indices.astype(np.int16)) <= 0).any():
            raise DomainFieldError("Sparse indices must be strictly ascending.")
        self._freeze("indices", indices.copy())
        self._freeze("values", values.copy())

    @property
    def k_active(self) -> int:
        return int(self.indices.size)

    @property
    def nbytes(self) -> int:
        """Stored size: values, u8 indices and the u16 offset."""
        return (self.precision.value_bytes + 1) * self.k_active + SPARSE_OFFSET_BYTES
