from collections import deque
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt

from swankv.domain.entities.base import Entity
from swankv.domain.entities.row_arena import RowArena
from swankv.domain.entities.sparse_history import SparseHistory
from swankv.domain.enums.precision import Precision
from swankv.domain.types import F32
from swankv.domain.value_objects.cache_params import CacheParams
from swankv.domain.value_objects.cache_slot import CacheSlot

DENSE_STORAGE = {
    Precision.FP16: np.float16,
    Precision.FP8: np.float16,
    Precision.F32: np.float32,
}


@dataclass(eq=False, kw_only=True)
class HybridKVCache(Entity[CacheSlot]):
    """
    Rotated K/V history of one (layer, KV-head): a FIFO dense buffer of at
    most `params.buffer` recent tokens in front of an append-only sparse
    history. Logical token order is sparse history (oldest first) followed
    by the buffer (oldest first).
    """

    d_h: int
    params: CacheParams
    buffer_k: deque[npt.NDArray[np.generic]] = field(default_factory=deque)
    buffer_v: deque[npt.NDArray[np.generic]] = field(default_factory=deque)
    sparse_k: SparseHistory = field(init=False)
    sparse_v: SparseHistory = field(init=False)
    appended: int = 0

    def __post_init__(self) -> None:
        self.sparse_k = SparseHistory(self.params.precision)
        self.sparse_v = SparseHistory(self.params.precision)

    @property
    def precision(self) -> Precision:
        return self.params.precision

    @property
    def dense_dtype(self) -> type[np.generic]:
        return DENSE_STORAGE[self.params.precision]

    def __len__(self) -> int:
        return len(self.sparse_k) + len(self.buffer_k)

    def buffer_keys(self) -> npt.NDArray[np.float32]:
        return _stack(self.buffer_k, self.d_h)

    def buffer_values(self) -> npt.NDArray[np.float32]:
        return _stack(self.buffer_v, self.d_h)


@dataclass(eq=False, kw_only=True)
class DenseKVCache(Entity[CacheSlot]):
    """Uncompressed f32 K/V history, used by the baseline path."""

    d_h: int
    keys: RowArena = field(init=False)
    values: RowArena = field(init=False)

    def __post_init__(self) -> None:
        self.keys = RowArena(self.d_h, F32)
        self.values = RowArena(self.d_h, F32)

    def __len__(self) -> int:
        return len(self.keys)

    def append(self, k: npt.ArrayLike, v: npt.ArrayLike) -> None:
        self.keys.append(k)
        self.values.append(v)

    @property
    def nbytes(self) -> int:
        return 2 * len(self) * self.d_h * np.dtype(F32).itemsize


def _stack(rows: deque[npt.NDArray[np.generic]], d_h: int) -> npt.NDArray[np.float32]:
    if not rows:
        return np.zeros((0, d_h), dtype=F32)
    return np.stack(rows).astype(F32)
