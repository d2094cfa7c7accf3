import logging
from collections.abc import Iterator
from typing import Final, NamedTuple

import numpy as np

from swankv.domain.entities.hybrid_kv_cache import DenseKVCache
from swankv.domain.enums.precision import Precision
from swankv.domain.services import sparse_cache
from swankv.domain.services.attention import (
    dense_attention_step,
    project,
    swan_attention_step,
)
from swankv.domain.services.flops import FlopsCounter, break_even_length
from swankv.domain.services.tensor import random_orthogonal
from swankv.domain.types import F32
from swankv.domain.value_objects.attention_step import AttentionStepInput
from swankv.domain.value_objects.break_even import CrossoverReport
from swankv.domain.value_objects.cache_params import CacheParams
from swankv.domain.value_objects.cache_slot import CacheSlot

log = logging.getLogger(__name__)

CROSSOVER_TOLERANCE: Final[int] = 2


class InstrumentedStep(NamedTuple):
    length: int
    standard_flops: int
    swan_flops: int
    standard_bytes: int
    swan_bytes: int


def retained_components(d_h: int, k: int) -> int:
    """Components a sparse entry can actually hold: k clamped to d_h."""
    return min(k, d_h)


def default_max_length(d_h: int, k: int, buffer: int) -> int:
    modeled = break_even_length(d_h, k, buffer).length
    return 2 * (modeled if modeled is not None else d_h + buffer)


def instrumented_steps(
    d_h: int,
    k: int,
    buffer: int,
    max_length: int,
    seed: int = 0,
) -> Iterator[InstrumentedStep]:
    """
    Drives one synthetic head through both kernels with Gaussian q/k/v.
    Yields measured FLOPs (softmax excluded) and stored cache bytes of both
    paths after every step. k above d_h keeps every component.
    """
    k = retained_components(d_h, k)
    rng = np.random.default_rng(seed)
    p_qk = random_orthogonal(d_h, seed)
    slot = CacheSlot(layer=0, kv_head=0)
    params = CacheParams(k_key=k, k_value=k, buffer=buffer, precision=Precision.F32)
    cache = sparse_cache.create_cache(slot, d_h, params)
    dense = DenseKVCache(id_=slot, d_h=d_h)

    for length in range(1, max_length + 1):
        q, k_new, v_new = rng.standard_normal((3, d_h)).astype(F32)
        swan_counter, standard_counter = FlopsCounter(), FlopsCounter()
        swan_attention_step(
            AttentionStepInput(q_new=q, k_new=k_new, v_new=v_new, position=length - 1),
            cache,
            p_qk,
            swan_counter,
        )
        dense.append(project(k_new[None, :], p_qk)[0], v_new)
        dense_attention_step(
            project(q[None, :], p_qk)[0],
            dense.keys.view(),
            dense.values.view(),
            standard_counter,
        )
        yield InstrumentedStep(
            length=length,
            standard_flops=standard_counter.total,
            swan_flops=swan_counter.total,
            standard_bytes=dense.nbytes,
            swan_bytes=sparse_cache.memory_footprint(cache).total,
        )


def crossover_validate(
    d_h: int,
    k: int,
    buffer: int,
    max_length: int | None = None,
    seed: int = 0,
    tolerance: int = CROSSOVER_TOLERANCE,
) -> CrossoverReport:
    """
    Reports the first L at which the measured SWAN step is strictly cheaper
    than the standard one, next to the modeled break-even length.

    :raises RejectedInputError:
    """
    modeled = break_even_length(d_h, k, buffer)
    limit = max_length or default_max_length(d_h, k, buffer)
    log.info("Crossover validation: d_h=%d k=%d b=%d L<=%d.", d_h, k, buffer, limit)

    steps = instrumented_steps(d_h, k, buffer, limit, seed)
    measured = next(
        (s.length for s in steps if s.swan_flops < s.standard_flops),
        None,
    )
    log.info(
        "Crossover validation: modeled %s, measured %s.",
        modeled.describe(),
        "not reached" if measured is None else measured,
    )
    return CrossoverReport(
        modeled=modeled,
        measured_length=measured,
        max_length=limit,
        tolerance=tolerance,
    )
