from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from swankv.domain.exceptions.numerics import NonFiniteInputError, ShapeMismatchError
from swankv.domain.types import F32, Vector
from swankv.domain.value_objects.base import ValueObject
from swankv.domain.value_objects.flops_report import StepFlops


@dataclass(frozen=True, repr=False, eq=False, kw_only=True)
class AttentionStepInput(ValueObject):
    """
    One decode step for one KV-head. `q_new` is a single post-RoPE query or
    a (G, d_h) block of the group's queries; `k_new` is post-RoPE and not yet
    projected; `v_new` is already in the rotated value space.

    raises RejectedInputError
    """

    q_new: npt.NDArray[np.float32]
    k_new: Vector
    v_new: Vector
    position: int
    layer: int = 0
    kv_head: int = 0

    def __post_init__(self) -> None:
        """
        :raises RejectedInputError:
        """
        super().__post_init__()

        q = np.asarray(self.q_new, dtype=F32)
        k = np.asarray(self.k_new, dtype=F32)
        v = np.asarray(self.v_new, dtype=F32)
        d_h = k.shape[-1] if k.ndim == 1 else -1
        if k.ndim != 1 or v.shape != k.shape:
            raise ShapeMismatchError("k_new / v_new", "(d_h,)", (k.shape, v.shape))
        if q.ndim not in {1, 2} or q.shape[-1] != d_h:
            raise ShapeMismatchError("q_new", f"(d_h,) or (G, {d_h})", q.shape)
        for name, arr in (("q_new", q), ("k_new", k), ("v_new", v)):
            if not np.isfinite(arr).all():
                raise NonFiniteInputError(name)
            self._freeze(name, arr.copy())

    @property
    def d_h(self) -> int:
        return int(self.k_new.shape[0])

    @property
    def query_block(self) -> npt.NDArray[np.float32]:
        """Queries as a (G, d_h) block."""
        return self.q_new.reshape(-1, self.d_h)


@dataclass(frozen=True, repr=False, eq=False, kw_only=True)
class AttentionStepOutput(ValueObject):
    """
    `output` mirrors the query shape. `scores` holds the pre-softmax scaled
    logits per query in logical token order, shape (G, L).
    """

    output: npt.NDArray[np.float32]
    scores: npt.NDArray[np.float32]
    flops: StepFlops
