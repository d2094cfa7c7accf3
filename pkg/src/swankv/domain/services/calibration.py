"""
Offline projection calibration.

For every (layer, KV-head): the group's post-RoPE queries (head-major, then
token-major) are stacked over the post-RoPE keys into S_QK; the values are
stacked over the transposed W_O slices of the group into S_VO. The right
singular bases of S_QK and S_VO, columns ordered by descending singular
value, become P_QK and P_VO.
"""

import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import numpy.typing as npt

from swankv.domain.entities.toy_model import ToyModel
from swankv.domain.enums.projection_variant import ProjectionVariant
from swankv.domain.exceptions.numerics import (
    RejectedConfigurationError,
    RejectedInputError,
    ShapeMismatchError,
)
from swankv.domain.services.tensor import as_matrix, random_orthogonal, svd
from swankv.domain.services.toy_model import forward_trace
from swankv.domain.types import F32, Matrix
from swankv.domain.value_objects.calibration_batch import CalibrationBatch
from swankv.domain.value_objects.model_config.model_config import ModelConfig
from swankv.domain.value_objects.projection_set import (
    CalibrationMetadata,
    ProjectionSet,
)

log = logging.getLogger(__name__)


def collect_activations(model: ToyModel, tokens: npt.ArrayLike) -> CalibrationBatch:
    """
    :raises RejectedInputError:
    """
    cfg = model.config
    stream = np.asarray(tokens, dtype=np.int64)
    if stream.ndim != 1 or stream.size == 0:
        raise RejectedInputError("Calibration needs a non-empty token stream.")
    if stream.min() < 0 or stream.max() >= cfg.vocab_size:
        raise RejectedInputError(f"Tokens must lie in [0, {cfg.vocab_size}).")

    trace = forward_trace(model, stream)
    return CalibrationBatch(
        config=cfg,
        q=np.stack([q for q, _, _ in trace]),
        k=np.stack([k for _, k, _ in trace]),
        v=np.stack([v for _, _, v in trace]),
        w_o=np.stack([layer.w_o for layer in model.layers]),
    )


def group_queries(q: npt.ArrayLike, n_kv: int) -> npt.NDArray[np.float32]:
    """
    (N_q, n, d_h) -> (N_kv, n·G, d_h). Within a group rows are head-major,
    then token-major: rows [g·n, (g+1)·n) belong to the group's g-th head.

    :raises RejectedConfigurationError:
    """
    q_ = np.asarray(q, dtype=F32)
    if q_.ndim != 3:
        raise ShapeMismatchError("query activations", "(N_q, n, d_h)", q_.shape)
    n_q, n, d_h = q_.shape
    if n_kv < 1 or n_q % n_kv:
        raise RejectedConfigurationError(
            f"{n_q} query heads cannot be split into {n_kv} groups.",
        )
    return q_.reshape(n_kv, (n_q // n_kv) * n, d_h)


def ungroup_queries(grouped: npt.ArrayLike, n_q: int) -> npt.NDArray[np.float32]:
    g_ = np.asarray(grouped, dtype=F32)
    n_kv, rows, d_h = g_.shape
    return g_.reshape(n_q, (n_kv * rows) // n_q, d_h)


def group_output_weights(
    w_o: npt.ArrayLike,
    n_q: int,
    n_kv: int,
) -> npt.NDArray[np.float32]:
    """
    (N_q·d_h, d) -> (N_kv, G, d_h, d): contiguous d_h-row bands per query
    head, grouped the same way as the queries.

    :raises RejectedInputError:
    :raises RejectedConfigurationError:
    """
    w = as_matrix(w_o, "W_O")
    if n_kv < 1 or n_q % n_kv:
        raise RejectedConfigurationError(
            f"{n_q} query heads cannot be split into {n_kv} groups.",
        )
    if w.shape[0] % n_q:
        raise ShapeMismatchError("W_O", f"({n_q} * d_h, d)", w.shape)
    d_h = w.shape[0] // n_q
    return w.reshape(n_kv, n_q // n_kv, d_h, w.shape[1])


def reassemble_output_weights(groups: npt.ArrayLike) -> Matrix:
    g_ = np.asarray(groups, dtype=F32)
    n_kv, group, d_h, d = g_.shape
    return g_.reshape(n_kv * group * d_h, d)


def build_joint_qk(q_grouped: npt.ArrayLike, k: npt.ArrayLike) -> Matrix:
    """
    Queries first, then keys.

    :raises RejectedInputError:
    """
    q_ = as_matrix(q_grouped, "grouped queries")
    k_ = as_matrix(k, "keys")
    if q_.shape[0] == 0 or k_.shape[0] == 0:
        raise RejectedInputError("S_QK needs both query and key rows.")
    if q_.shape[1] != k_.shape[1]:
        raise ShapeMismatchError("keys", (k_.shape[0], q_.shape[1]), k_.shape)
    return np.vstack([q_, k_])


def build_joint_vo(v: npt.ArrayLike, w_o_group: npt.ArrayLike) -> Matrix:
    """
    Values first, then every W_O slice of the group transposed to d x d_h,
    in group order.

    :raises RejectedInputError:
    """
    v_ = as_matrix(v, "values")
    slices = np.asarray(w_o_group, dtype=F32)
    if slices.ndim != 3 or slices.shape[1] != v_.shape[1]:
        raise ShapeMismatchError("W_O group", ("G", v_.shape[1], "d"), slices.shape)
    if v_.shape[0] == 0:
        raise RejectedInputError("S_VO needs value rows.")
    return np.vstack([v_, *(s.T for s in slices)])


def derive_projection(s: npt.ArrayLike) -> Matrix:
    """
    Right singular basis of `s`, computed from the d_h x d_h Gram matrix.

    :raises RejectedInputError:
    """
    s_ = as_matrix(s, "joint matrix")
    rows, d_h = s_.shape
    if rows < d_h:
        raise RejectedInputError(
            f"Joint matrix has {rows} rows; at least {d_h} are needed for a basis.",
        )
    gram = (s_.T @ s_).astype(F32)
    return svd(gram).v


def _derive_pair(
    batch: CalibrationBatch,
    layer: int,
    kv_head: int,
) -> tuple[Matrix, Matrix]:
    cfg = batch.config
    q_grouped = group_queries(batch.q[layer], cfg.n_kv_heads)[kv_head]
    w_o_full = batch.w_o[layer].reshape(cfg.n_q_heads * cfg.d_h, cfg.d)
    w_o_group = group_output_weights(w_o_full, cfg.n_q_heads, cfg.n_kv_heads)[kv_head]
    p_qk = derive_projection(build_joint_qk(q_grouped, batch.k[layer, kv_head]))
    p_vo = derive_projection(build_joint_vo(batch.v[layer, kv_head], w_o_group))
    log.debug("Derived projections: layer %d, KV-head %d.", layer, kv_head)
    return p_qk, p_vo


def calibrate_batch(
    batch: CalibrationBatch,
    corpus_id: str,
    seed: int,
    workers: int = 1,
) -> ProjectionSet:
    cfg = batch.config
    slots = [(i, h) for i in range(cfg.num_layers) for h in range(cfg.n_kv_heads)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            pairs = list(pool.map(lambda s: _derive_pair(batch, *s), slots))
    else:
        pairs = [_derive_pair(batch, *s) for s in slots]

    shape = (cfg.num_layers, cfg.n_kv_heads, cfg.d_h, cfg.d_h)
    return ProjectionSet(
        config=cfg,
        p_qk=np.stack([p for p, _ in pairs]).reshape(shape),
        p_vo=np.stack([p for _, p in pairs]).reshape(shape),
        variant=ProjectionVariant.LEARNED,
        metadata=CalibrationMetadata(
            seed=seed,
            token_count=batch.token_count,
            corpus_id=corpus_id,
        ),
    )


def calibrate(
    model: ToyModel,
    tokens: npt.ArrayLike,
    corpus_id: str,
    seed: int,
    workers: int = 1,
) -> ProjectionSet:
    """
    collect -> group -> joint matrices -> derive, for every (layer, KV-head).

    :raises RejectedInputError:
    """
    batch = collect_activations(model, tokens)
    log.info(
        "Calibrating %d layers x %d KV-heads on %d tokens.",
        model.config.num_layers,
        model.config.n_kv_heads,
        batch.token_count,
    )
    return calibrate_batch(batch, corpus_id, seed, workers)


def identity_projection_set(
    config: ModelConfig,
    metadata: CalibrationMetadata | None = None,
) -> ProjectionSet:
    eye = np.broadcast_to(
        np.eye(config.d_h, dtype=F32),
        (config.num_layers, config.n_kv_heads, config.d_h, config.d_h),
    )
    return ProjectionSet(
        config=config,
        p_qk=eye,
        p_vo=eye,
        variant=ProjectionVariant.IDENTITY,
        metadata=metadata or CalibrationMetadata(seed=0, token_count=0, corpus_id=""),
    )


def _random_stack(d_h: int, seeds: npt.NDArray[np.int64]) -> npt.NDArray[np.float32]:
    return np.stack([[random_orthogonal(d_h, int(s)) for s in row] for row in seeds])


def _derangement(rng: np.random.Generator, n: int) -> npt.NDArray[np.intp]:
    """Seeded permutation without fixed points; identity when n < 2."""
    if n < 2:
        return np.arange(n)
    while True:
        perm = rng.permutation(n)
        if (perm != np.arange(n)).all():
            return perm


def make_ablation_variant(
    base: ProjectionSet,
    variant: ProjectionVariant | str,
    seed: int,
) -> ProjectionSet:
    """
    - random: every matrix replaced by an independent seeded orthogonal draw
    - layer_shuffle: layers permuted, (head, kind) kept
    - kv_shuffle: P_QK and P_VO interchanged
    - head_shuffle: KV-heads permuted within every layer
    - identity / learned: all-identity control / `base` unchanged

    Shuffles use seeded permutations without fixed points where the axis has
    at least two entries.

    :raises RejectedInputError:
    """
    try:
        tag = ProjectionVariant(variant)
    except ValueError as err:
        raise RejectedInputError(f"Unknown projection variant {variant!r}.") from err

    cfg = base.config
    rng = np.random.default_rng(seed)
    p_qk, p_vo = base.p_qk, base.p_vo
    match tag:
        case ProjectionVariant.LEARNED:
            return base
        case ProjectionVariant.IDENTITY:
            return identity_projection_set(cfg, base.metadata)
        case ProjectionVariant.RANDOM:
            seeds = rng.integers(0, 2**63, size=(2, cfg.num_layers, cfg.n_kv_heads))
            p_qk = _random_stack(cfg.d_h, seeds[0])
            p_vo = _random_stack(cfg.d_h, seeds[1])
        case ProjectionVariant.LAYER_SHUFFLE:
            perm = _derangement(rng, cfg.num_layers)
            p_qk, p_vo = p_qk[perm], p_vo[perm]
        case ProjectionVariant.KV_SHUFFLE:
            p_qk, p_vo = p_vo, p_qk
        case ProjectionVariant.HEAD_SHUFFLE:
            perms = [_derangement(rng, cfg.n_kv_heads) for _ in range(cfg.num_layers)]
            p_qk = np.stack([p_qk[i, perm] for i, perm in enumerate(perms)])
            p_vo = np.stack([p_vo[i, perm] for i, perm in enumerate(perms)])

    log.debug("Built %s projection variant (seed %d).", tag, seed)
    return ProjectionSet(
        config=cfg,
        p_qk=p_qk,
        p_vo=p_vo,
        variant=tag,
        metadata=base.metadata,
    )


def rotated_topk(
    x_rows: npt.ArrayLike,
    basis: npt.ArrayLike,
    k: int,
) -> tuple[Matrix, Matrix]:
    """Rows rotated into `basis` and their per-row magnitude top-k pruning."""
    x = as_matrix(x_rows, "activations")
    p = as_matrix(basis, "basis")
    if not 0 <= k <= p.shape[1]:
        raise RejectedInputError(f"k must lie in [0, {p.shape[1]}], got {k}.")
    rotated = x @ p
    keep = np.argsort(-np.abs(rotated), axis=1, kind="stable")[:, :k]
    pruned = np.zeros_like(rotated)
    rows = np.arange(rotated.shape[0])[:, None]
    pruned[rows, keep] = rotated[rows, keep]
    return rotated, pruned


def topk_energy_fraction(x_rows: npt.ArrayLike, basis: npt.ArrayLike, k: int) -> float:
    """Mean share of squared norm kept by per-row top-k in the rotated basis."""
    rotated, pruned = rotated_topk(x_rows, basis, k)
    total = np.sum(rotated.astype(np.float64) ** 2, axis=1)
    kept = np.sum(pruned.astype(np.float64) ** 2, axis=1)
    nonzero = total > 0
    if not nonzero.any():
        return 1.0
    return float(np.mean(kept[nonzero] / total[nonzero]))


def pruned_reconstruction_error(
    x_rows: npt.ArrayLike,
    basis: npt.ArrayLike,
    k: int,
) -> float:
    """
    Mean relative squared error of rotate -> prune to top-k -> rotate back.
    """
    x = as_matrix(x_rows, "activations").astype(np.float64)
    _, pruned = rotated_topk(x_rows, basis, k)
    restored = pruned.astype(np.float64) @ np.asarray(basis, dtype=np.float64).T
    total = np.sum(x**2, axis=1)
    nonzero = total > 0
    if not nonzero.any():
        return 0.0
    err = np.sum((x - restored) ** 2, axis=1)
    return float(np.mean(err[nonzero] / total[nonzero]))
