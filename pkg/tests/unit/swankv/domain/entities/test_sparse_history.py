import numpy as np

from swankv.domain.entities.sparse_history import SparseHistory
from swankv.domain.enums.precision import Precision
from swankv.domain.value_objects.sparse_vector import SparseVector


def _sv(indices, values):
    return SparseVector(
        indices=np.array(indices, dtype=np.uint8),
        values=np.array(values, dtype=np.float16),
        precision=Precision.FP16,
    )


def test_history_keeps_logical_order_across_lanes():
    history = SparseHistory(Precision.FP16)
    vectors = [_sv([0, 2], [1, 2]), _sv([1], [3]), _sv([3, 5], [4, 5])]

    for sv in vectors:
        history.append(sv)

    assert len(history) == 3
    assert list(history) == vectors
    assert not history.is_single_lane

    positions = sorted(int(p) for pos, _, _ in history.lanes() for p in pos)
    assert positions == [0, 1, 2]


def test_history_nbytes():
    history = SparseHistory(Precision.FP16)
    history.append(_sv([0, 2], [1, 2]))
    history.append(_sv([1], [3]))

    assert history.nbytes == (3 * 2 + 2) + (3 * 1 + 2)
