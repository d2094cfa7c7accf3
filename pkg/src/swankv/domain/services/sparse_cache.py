"""
Hybrid KV store operations: magnitude top-k pruning, storage encodings,
FIFO eviction into the sparse history and exact byte accounting.
"""

import logging
from dataclasses import replace

import numpy as np
import numpy.typing as npt

from swankv.domain.entities.hybrid_kv_cache import HybridKVCache
from swankv.domain.enums.precision import Precision
from swankv.domain.exceptions.numerics import (
    RejectedInputError,
    RejectedStateError,
    ShapeMismatchError,
)
from swankv.domain.services.fp8 import decode_fp8, encode_fp16, encode_fp8, is_fp8_nan
from swankv.domain.services.tensor import as_vector
from swankv.domain.types import F32, IndexArray, Vector
from swankv.domain.value_objects.cache_footprint import CacheFootprint
from swankv.domain.value_objects.cache_params import CacheParams
from swankv.domain.value_objects.cache_slot import CacheSlot
from swankv.domain.value_objects.memory_model import MemoryModel
from swankv.domain.value_objects.model_config.constants import HEAD_DIM_MAX
from swankv.domain.value_objects.sparse_vector import SparseVector

log = logging.getLogger(__name__)


def create_cache(slot: CacheSlot, d_h: int, params: CacheParams) -> HybridKVCache:
    """
    :raises RejectedInputError:
    """
    if not 1 <= d_h <= HEAD_DIM_MAX:
        raise RejectedInputError(f"Head dimension must lie in [1, {HEAD_DIM_MAX}].")
    params.check_head_dim(d_h)
    return HybridKVCache(id_=slot, d_h=d_h, params=params)


def top_k_indices(v: npt.ArrayLike, k: int) -> IndexArray:
    """
    Indices of the k largest |v_i|, ascending. Ties go to the lower index.

    :raises RejectedInputError:
    """
    v_ = as_vector(v, "head vector")
    if not 0 <= k <= v_.size:
        raise RejectedInputError(f"k must lie in [0, {v_.size}], got {k}.")
    order = np.argsort(-np.abs(v_), kind="stable")[:k]
    return np.sort(order).astype(np.uint8)


def encode_values(x: npt.ArrayLike, precision: Precision) -> npt.NDArray[np.generic]:
    if precision is Precision.FP8:
        return encode_fp8(x)
    if precision is Precision.FP16:
        return encode_fp16(x)
    return np.asarray(x, dtype=F32)


def decode_values(
    stored: npt.NDArray[np.generic],
    precision: Precision,
) -> npt.NDArray[np.float32]:
    if precision is Precision.FP8:
        return decode_fp8(stored)
    return stored.astype(F32)


def sparsify(
    v: npt.ArrayLike,
    indices: npt.ArrayLike,
    precision: Precision,
) -> SparseVector:
    """
    :raises RejectedInputError:
    """
    v_ = as_vector(v, "head vector")
    idx = np.asarray(indices, dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= v_.size):
        raise RejectedInputError(f"Sparse indices must lie in [0, {v_.size}).")
    return SparseVector(
        indices=idx.astype(np.uint8),
        values=encode_values(v_[idx], precision),
        precision=precision,
    )


def densify(sv: SparseVector, d_h: int) -> Vector:
    """Diagnostic reconstruction; the attention kernel never calls this."""
    out = np.zeros(d_h, dtype=F32)
    out[sv.indices] = decode_values(sv.values, sv.precision)
    return out


def prune(v: npt.ArrayLike, k: int, precision: Precision) -> SparseVector:
    return sparsify(v, top_k_indices(v, k), precision)


def _to_dense(x: Vector, dtype: type[np.generic]) -> npt.NDArray[np.generic]:
    """Buffer rows saturate the same way sparse fp16 entries do."""
    if dtype is np.float16:
        return encode_fp16(x)
    return x.astype(dtype)


def append(
    cache: HybridKVCache,
    k_rot: npt.ArrayLike,
    v_rot: npt.ArrayLike,
) -> tuple[SparseVector, SparseVector] | None:
    """
    Pushes a rotated pair into the buffer. When the buffer overflows, its
    oldest pair is pruned to (k_key, k_value) components, encoded and moved
    to the sparse history; that pair is returned.

    :raises RejectedInputError:
    """
    k_ = as_vector(k_rot, "rotated key")
    v_ = as_vector(v_rot, "rotated value")
    if k_.shape != (cache.d_h,) or v_.shape != (cache.d_h,):
        raise ShapeMismatchError("cache append", (cache.d_h,), (k_.shape, v_.shape))

    cache.buffer_k.append(_to_dense(k_, cache.dense_dtype))
    cache.buffer_v.append(_to_dense(v_, cache.dense_dtype))
    cache.appended += 1
    if len(cache.buffer_k) <= cache.params.buffer:
        return None

    old_k = cache.buffer_k.popleft().astype(F32)
    old_v = cache.buffer_v.popleft().astype(F32)
    sk = prune(old_k, cache.params.k_key, cache.precision)
    sv = prune(old_v, cache.params.k_value, cache.precision)
    cache.sparse_k.append(sk)
    cache.sparse_v.append(sv)
    return sk, sv


def retune(cache: HybridKVCache, k_key: int, k_value: int) -> None:
    """
    Changes the retention applied to future evictions. Entries already in
    the sparse history keep their size.

    :raises RejectedInputError:
    """
    params = replace(cache.params, k_key=k_key, k_value=k_value)
    params.check_head_dim(cache.d_h)
    log.debug(
        "retune %r: k_key %d -> %d, k_value %d -> %d.",
        cache.id_,
        cache.params.k_key,
        k_key,
        cache.params.k_value,
        k_value,
    )
    cache.params = params


def memory_footprint(cache: HybridKVCache) -> CacheFootprint:
    dense = cache.d_h * np.dtype(cache.dense_dtype).itemsize
    return CacheFootprint(
        sparse_k=cache.sparse_k.nbytes,
        sparse_v=cache.sparse_v.nbytes,
        buffer_k=len(cache.buffer_k) * dense,
        buffer_v=len(cache.buffer_v) * dense,
    )


def logical_history(cache: HybridKVCache) -> tuple[Vector, Vector]:
    """
    Densified K and V in logical token order. Diagnostic only.
    """
    keys = [densify(sv, cache.d_h) for sv in cache.sparse_k]
    values = [densify(sv, cache.d_h) for sv in cache.sparse_v]
    k_all = np.vstack([np.reshape(keys, (-1, cache.d_h)), cache.buffer_keys()])
    v_all = np.vstack([np.reshape(values, (-1, cache.d_h)), cache.buffer_values()])
    return k_all.astype(F32), v_all.astype(F32)


def validate(cache: HybridKVCache) -> None:
    """
    :raises RejectedStateError:
    """
    if len(cache.buffer_k) != len(cache.buffer_v):
        raise RejectedStateError("Key and value buffers differ in length.")
    if len(cache.buffer_k) > cache.params.buffer:
        raise RejectedStateError(
            f"Buffer holds {len(cache.buffer_k)} > {cache.params.buffer} entries.",
        )
    if len(cache.sparse_k) != len(cache.sparse_v):
        raise RejectedStateError("Sparse key and value histories differ in length.")
    if len(cache) != cache.appended:
        raise RejectedStateError(
            f"Cache holds {len(cache)} tokens but {cache.appended} were appended.",
        )
    for kind, history in (("key", cache.sparse_k), ("value", cache.sparse_v)):
        for _, indices, stored in history.lanes():
            if indices.size and int(indices.max()) >= cache.d_h:
                raise RejectedStateError(f"Sparse {kind} index out of range.")
            if cache.precision is Precision.FP8 and is_fp8_nan(stored).any():
                raise RejectedStateError(f"Sparse {kind} holds the fp8 NaN sentinel.")
            if not np.isfinite(decode_values(stored, cache.precision)).all():
                raise RejectedStateError(f"Sparse {kind} decodes to non-finite values.")
    for kind, rows in (("key", cache.buffer_keys()), ("value", cache.buffer_values())):
        if not np.isfinite(rows).all():
            raise RejectedStateError(f"Buffered {kind} is not finite.")


def compression_curve(
    d_h: int,
    precision: Precision,
) -> tuple[tuple[float, float], ...]:
    """(retention, memory ratio) for every k in [0, d_h]."""
    if not 1 <= d_h <= HEAD_DIM_MAX:
        raise RejectedInputError(f"Head dimension must lie in [1, {HEAD_DIM_MAX}].")
    models = (
        MemoryModel(d_h=d_h, k_active=k, precision=precision) for k in range(d_h + 1)
    )
    return tuple((m.retention, m.compression_ratio) for m in models)


def break_even_k(d_h: int, precision: Precision) -> int:
    """Largest k whose sparse vector is no larger than the dense one."""
    return max(
        (
            k
            for k in range(d_h + 1)
            if MemoryModel(d_h=d_h, k_active=k, precision=precision).compression_ratio
            <= 1.0
        ),
        default=0,
    )


def iso_memory_k(d_h: int, k_fp16: int) -> int:
    """
    Largest fp8 k whose vector costs no more than an fp16 vector with
    `k_fp16` components.

    :raises RejectedInputError:
    """
    budget = MemoryModel(d_h=d_h, k_active=k_fp16, precision=Precision.FP16)
    return max(
        k
        for k in range(d_h + 1)
        if MemoryModel(d_h=d_h, k_active=k, precision=Precision.FP8)
        .bytes_per_sparse_vector
        <= budget.bytes_per_sparse_vector
    )
