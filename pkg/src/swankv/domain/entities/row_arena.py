import numpy as np
import numpy.typing as npt


class RowArena:
    """
    Append-only 2-D array with amortized O(1) row appends.
    `view()` returns the filled rows without copying.
    """

    __slots__ = ("_data", "_size")

    def __init__(self, width: int, dtype: npt.DTypeLike, capacity: int = 16):
        self._data = np.zeros((max(capacity, 1), width), dtype=dtype)
        self._size = 0

    def __len__(self) -> int:
        return self._size

    @property
    def width(self) -> int:
        return int(self._data.shape[1])

    def append(self, row: npt.ArrayLike) -> int:
        if self._size == self._data.shape[0]:
            grown = np.zeros((2 * self._data.shape[0], self.width), self._data.dtype)
            grown[: self._size] = self._data[: self._size]
            self._data = grown
        self._data[self._size] = row
        self._size += 1
        return self._size - 1

    def view(self) -> npt.NDArray[np.generic]:
        return self._data[: self._size]
