"""
Decode-step attention kernels.

`swan_attention_step` follows the hybrid algorithm: project q and k with
P_QK, append to the cache (possibly evicting into the sparse history),
score against sparse then buffered keys, softmax once over the
concatenation, and aggregate sparse then buffered values. Sparse entries
are consumed in their stored form; the history is never densified.

Accumulation order contract: every dot product sums sequentially over
the head dimension, and value aggregation sums sequentially over tokens in
logical order. The dense oracle follows the same contract, so the two
agree bit-for-bit when every token sits in an f32 buffer.
"""

import math
from typing import Final

import numpy as np
import numpy.typing as npt

from swankv.domain.entities.hybrid_kv_cache import HybridKVCache
from swankv.domain.exceptions.numerics import (
    RejectedConfigurationError,
    RejectedStateError,
    ShapeMismatchError,
)
from swankv.domain.services import sparse_cache
from swankv.domain.services.flops import SOFTMAX_FLOPS_PER_SCORE, FlopsCounter
from swankv.domain.services.tensor import (
    as_matrix,
    as_vector,
    orthogonality_residual,
    row_dots,
    softmax,
)
from swankv.domain.types import F32, Matrix, Vector
from swankv.domain.value_objects.attention_step import (
    AttentionStepInput,
    AttentionStepOutput,
)
from swankv.domain.value_objects.flops_report import StepFlops
from swankv.domain.value_objects.sparse_vector import SparseVector

PROJECTION_RESIDUAL_LIMIT: Final[float] = 1e-3


def project(rows: npt.ArrayLike, p: Matrix) -> Matrix:
    """Row vectors into the rotated basis: x·P."""
    return (np.asarray(rows, dtype=F32) @ p).astype(F32, copy=False)


def sparse_dense_dot(q_rot: npt.ArrayLike, sv: SparseVector) -> np.float32:
    """Σ q[idx]·decode(value) over the stored components only."""
    q = as_vector(q_rot, "rotated query")
    if sv.k_active == 0:
        return F32(0.0)
    if int(sv.indices.max()) >= q.size:
        raise ShapeMismatchError("sparse index", f"< {q.size}", int(sv.indices.max()))
    terms = q[sv.indices] * sparse_cache.decode_values(sv.values, sv.precision)
    return F32(np.cumsum(terms, dtype=F32)[-1])


def _check_projection(p_qk: npt.ArrayLike, d_h: int) -> Matrix:
    p = as_matrix(p_qk, "P_QK")
    if p.shape != (d_h, d_h):
        raise RejectedConfigurationError(
            f"P_QK must be {d_h}x{d_h}, got {p.shape}.",
        )
    residual = orthogonality_residual(p)
    if residual > PROJECTION_RESIDUAL_LIMIT:
        raise RejectedConfigurationError(
            f"P_QK is not orthogonal (residual {residual:.3e}).",
        )
    return p


def _sparse_scores(cache: HybridKVCache, queries: Matrix) -> Matrix:
    scores = np.zeros((queries.shape[0], len(cache.sparse_k)), dtype=F32)
    for positions, indices, stored in cache.sparse_k.lanes():
        if indices.shape[1] == 0:
            continue
        values = sparse_cache.decode_values(stored, cache.precision)
        for g, q in enumerate(queries):
            terms = q[indices] * values
            scores[g, positions] = np.cumsum(terms, axis=1, dtype=F32)[:, -1]
    return scores


def _sparse_aggregate(cache: HybridKVCache, weights: Vector, out: Vector) -> None:
    """Scatter-adds weighted sparse values into `out` in token order."""
    pos_parts, idx_parts, val_parts = [], [], []
    for positions, indices, stored in cache.sparse_v.lanes():
        if indices.shape[1] == 0:
            continue
        values = sparse_cache.decode_values(stored, cache.precision)
        contrib = weights[positions][:, None] * values
        pos_parts.append(np.repeat(positions, indices.shape[1]))
        idx_parts.append(indices.reshape(-1))
        val_parts.append(contrib.reshape(-1))
    if not idx_parts:
        return
    idx = np.concatenate(idx_parts)
    vals = np.concatenate(val_parts)
    if len(idx_parts) > 1:
        order = np.argsort(np.concatenate(pos_parts), kind="stable")
        idx, vals = idx[order], vals[order]
    np.add.at(out, idx.astype(np.intp), vals)


def _dense_aggregate(start: Vector, weights: Vector, values: Matrix) -> Vector:
    if values.shape[0] == 0:
        return start
    rows = np.vstack([start[None, :], weights[:, None] * values])
    return np.cumsum(rows, axis=0, dtype=F32)[-1]


def swan_attention_step(
    step: AttentionStepInput,
    cache: HybridKVCache,
    p_qk: npt.ArrayLike,
    counter: FlopsCounter | None = None,
) -> AttentionStepOutput:
    """
    :raises RejectedConfigurationError:
    :raises RejectedInputError:
    """
    d_h = cache.d_h
    if step.d_h != d_h:
        raise RejectedConfigurationError(
            f"Step head dimension {step.d_h} does not match cache ({d_h}).",
        )
    p = _check_projection(p_qk, d_h)

    queries = project(step.query_block, p)
    k_rot = project(step.k_new[None, :], p)[0]
    sparse_cache.append(cache, k_rot, step.v_new)

    buf_k = cache.buffer_keys()
    buf_v = cache.buffer_values()
    sparse_scores = _sparse_scores(cache, queries)
    scale = 1.0 / math.sqrt(d_h)

    outputs = np.empty_like(queries)
    raw = np.empty((queries.shape[0], len(cache)), dtype=F32)
    for g, q in enumerate(queries):
        raw[g] = np.concatenate([sparse_scores[g], row_dots(buf_k, q)])
        weights = softmax(raw[g], scale)
        acc = np.zeros(d_h, dtype=F32)
        _sparse_aggregate(cache, weights[: len(cache.sparse_v)], acc)
        outputs[g] = _dense_aggregate(acc, weights[len(cache.sparse_v) :], buf_v)

    sparse_terms = _stored_components(cache)
    flops = StepFlops(
        projection=2 * d_h * d_h * (queries.shape[0] + 1),
        matvec=queries.shape[0] * (2 * sparse_terms + 4 * buf_k.shape[0] * d_h),
        softmax=queries.shape[0] * SOFTMAX_FLOPS_PER_SCORE * len(cache),
    )
    if counter is not None:
        counter.record(flops)
    return AttentionStepOutput(
        output=outputs.reshape(step.q_new.shape),
        scores=raw * F32(scale),
        flops=flops,
    )


def _stored_components(cache: HybridKVCache) -> int:
    """Stored sparse components over the key and value histories."""
    return sum(
        positions.size * indices.shape[1]
        for history in (cache.sparse_k, cache.sparse_v)
        for positions, indices, _ in history.lanes()
    )


def dense_attention_step(
    q: npt.ArrayLike,
    keys: npt.ArrayLike,
    values: npt.ArrayLike,
    counter: FlopsCounter | None = None,
) -> Vector:
    """
    softmax(q·Kᵀ / √d_h)·V over the whole history; the equivalence oracle.

    :raises RejectedStateError:
    :raises RejectedInputError:
    """
    k_ = np.asarray(keys, dtype=F32)
    v_ = np.asarray(values, dtype=F32)
    if k_.ndim != 2 or k_.shape[0] == 0:
        raise RejectedStateError("Dense attention over an empty cache.")
    q_ = as_vector(q, "query")
    if k_.shape[1] != q_.size or v_.shape != k_.shape:
        raise ShapeMismatchError("dense cache", (k_.shape[0], q_.size), v_.shape)

    weights = softmax(row_dots(k_, q_), 1.0 / math.sqrt(q_.size))
    out = _dense_aggregate(np.zeros(q_.size, dtype=F32), weights, v_)
    if counter is not None:
        counter.record(
            StepFlops(
                projection=0,
                matvec=4 * k_.shape[0] * q_.size,
                softmax=SOFTMAX_FLOPS_PER_SCORE * k_.shape[0],
            ),
        )
    return out
