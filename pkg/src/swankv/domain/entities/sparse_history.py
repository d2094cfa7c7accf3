from collections.abc import Iterator
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt

from swankv.domain.entities.row_arena import RowArena
from swankv.domain.enums.precision import Precision
from swankv.domain.value_objects.sparse_vector import STORAGE_DTYPES, SparseVector


LaneView = tuple[
    npt.NDArray[np.int64],
    npt.NDArray[np.uint8],
    npt.NDArray[np.generic],
]


@dataclass(slots=True)
class SparseLane:
    """Sparse vectors sharing one k_active, stored row-wise."""

    positions: RowArena
    indices: RowArena
    values: RowArena


@dataclass(slots=True)
class SparseHistory:
    """
    Append-only list of `SparseVector`s. Vectors with the same k_active share
    a lane of contiguous index/value rows so that kernels can score a whole
    lane at once; `positions` maps each lane row back to its logical slot.
    """

    precision: Precision
    _lanes: dict[int, SparseLane] = field(default_factory=dict)
    _order: list[tuple[int, int]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self._order)

    def append(self, sv: SparseVector) -> None:
        lane = self._lanes.get(sv.k_active)
        if lane is None:
            lane = SparseLane(
                positions=RowArena(1, np.int64),
                indices=RowArena(sv.k_active, np.uint8),
                values=RowArena(sv.k_active, STORAGE_DTYPES[self.precision]),
            )
            self._lanes[sv.k_active] = lane
        row = lane.indices.append(sv.indices)
        lane.values.append(sv.values)
        lane.positions.append(len(self._order))
        self._order.append((sv.k_active, row))

    def __getitem__(self, i: int) -> SparseVector:
        k, row = self._order[i]
        lane = self._lanes[k]
        return SparseVector(
            indices=lane.indices.view()[row],
            values=lane.values.view()[row],
            precision=self.precision,
        )

    def __iter__(self) -> Iterator[SparseVector]:
        return (self[i] for i in range(len(self)))

    def lanes(self) -> Iterator[LaneView]:
        """(positions, indices, stored values) per lane, as read-only views."""
        for lane in self._lanes.values():
            yield (
                lane.positions.view()[:, 0],
                lane.indices.view(),
                lane.values.view(),
            )

    @property
    def is_single_lane(self) -> bool:
        return len(self._lanes) <= 1

    @property
    def nbytes(self) -> int:
        value_bytes = self.precision.value_bytes
        return sum(
            len(lane.positions) * ((value_bytes + 1) * k + 2)
            for k, lane in self._lanes.items()
        )
