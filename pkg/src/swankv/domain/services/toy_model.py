"""
Seeded toy transformer: construction, per-layer primitives shared by the
decode loop and the calibration pass, and model transformations.

Attention weights are generated with a deliberately low-rank-dominant
structure so that subspace projections have something to find:

- W_Q / W_K of a KV group share per-dimension scales that are tied across
  RoPE pairs, decay over the leading three quarters of the head and drop
  to ~1% on the last quarter. Each KV head permutes its pairs.
- W_V uses decaying scales behind a small head-specific rotation, and the
  W_O slices of the group are aligned with the same rotated basis. The last
  quarter of the value scales sits at VALUE_TAIL_SCALE, ten times the key
  tail.
"""

import logging
from dataclasses import replace
from typing import Final

import numpy as np
import numpy.typing as npt
from scipy.linalg import expm

from swankv.domain.entities.toy_model import LayerWeights, ToyModel, Weights
from swankv.domain.exceptions.numerics import RejectedConfigurationError
from swankv.domain.services.absorption import (
    absorb_output_projection,
    absorb_value_projection,
)
from swankv.domain.services.tensor import rope_sequence
from swankv.domain.types import F32, Matrix
from swankv.domain.value_objects.model_config.model_config import ModelConfig
from swankv.domain.value_objects.model_id import ModelId
from swankv.domain.value_objects.projection_set import ProjectionSet

log = logging.getLogger(__name__)

LAYER_NORM_EPS: Final[float] = 1e-5
MLP_EXPANSION: Final[int] = 2
TAIL_SCALE: Final[float] = 0.01
VALUE_TAIL_SCALE: Final[float] = 0.1
HEAD_SCALE_RANGE: Final[tuple[float, float]] = (1.6, 0.45)
VALUE_ROTATION: Final[float] = 0.35
LOGIT_STD: Final[float] = 4.0
MLP_OUT_GAIN: Final[float] = 0.5


def head_scales(d_h: int) -> npt.NDArray[np.float64]:
    """
    Per-pair scales: linear decay over the leading 3/4 of the pairs,
    TAIL_SCALE on the rest.
    """
    pairs = d_h // 2
    lead = max(1, (3 * pairs) // 4)
    scales = np.full(pairs, TAIL_SCALE)
    scales[:lead] = np.linspace(*HEAD_SCALE_RANGE, num=lead)
    return scales


def value_dim_scales(d_h: int) -> npt.NDArray[np.float64]:
    """
    Per-dimension value scales: squared linear decay over the leading 3/4,
    VALUE_TAIL_SCALE on the rest. Distinct over the leading part so the
    value spectrum has no ties there.
    """
    lead = max(1, (3 * d_h) // 4)
    scales = np.full(d_h, VALUE_TAIL_SCALE)
    scales[:lead] = np.linspace(*HEAD_SCALE_RANGE, num=lead) ** 2 / HEAD_SCALE_RANGE[0]
    return scales


def _orthonormal_columns(rng: np.random.Generator, rows: int, cols: int) -> Matrix:
    q, _ = np.linalg.qr(rng.standard_normal((rows, cols)))
    return q


def _near_identity_rotation(rng: np.random.Generator, dim: int) -> Matrix:
    a = rng.standard_normal((dim, dim)) * (VALUE_ROTATION / np.sqrt(dim))
    return expm(a - a.T)


def _build_layer(rng: np.random.Generator, cfg: ModelConfig) -> LayerWeights:
    d, d_h, group = cfg.d, cfg.d_h, cfg.group_size
    pair_scales = head_scales(d_h)
    value_scales = value_dim_scales(d_h)

    w_q = np.empty((cfg.n_q_heads, d, d_h))
    w_k = np.empty((cfg.n_kv_heads, d, d_h))
    w_v = np.empty((cfg.n_kv_heads, d, d_h))
    w_o = np.empty((cfg.n_q_heads, d_h, d))
    for h in range(cfg.n_kv_heads):
        qk_scales = np.repeat(rng.permutation(pair_scales), 2)
        w_k[h] = _orthonormal_columns(rng, d, d_h) * qk_scales[None, :]
        rotation = _near_identity_rotation(rng, d_h)
        w_v[h] = (_orthonormal_columns(rng, d, d_h) * value_scales[None, :]) @ rotation
        for j in range(h * group, (h + 1) * group):
            w_q[j] = _orthonormal_columns(rng, d, d_h) * qk_scales[None, :]
            out_basis = _orthonormal_columns(rng, d, d_h)
            w_o[j] = rotation.T @ (value_scales[:, None] * out_basis.T)

    d_ff = MLP_EXPANSION * d
    return LayerWeights(
        ln1_gain=np.ones(d, dtype=F32),
        ln1_bias=np.zeros(d, dtype=F32),
        w_q=w_q.astype(F32),
        w_k=w_k.astype(F32),
        w_v=w_v.astype(F32),
        w_o=w_o.astype(F32),
        ln2_gain=np.ones(d, dtype=F32),
        ln2_bias=np.zeros(d, dtype=F32),
        w_1=(rng.standard_normal((d, d_ff)) / np.sqrt(d)).astype(F32),
        b_1=np.zeros(d_ff, dtype=F32),
        w_2=(rng.standard_normal((d_ff, d)) * MLP_OUT_GAIN / np.sqrt(d_ff)).astype(F32),
        b_2=np.zeros(d, dtype=F32),
    )


def build_toy_model(config: ModelConfig, seed: int) -> ToyModel:
    """
    Deterministic in (config, seed).

    :raises RejectedConfigurationError:
    """
    model_id = ModelId(config=config, seed=seed)
    rng = np.random.default_rng(seed)
    embedding = rng.standard_normal((config.vocab_size, config.d)).astype(F32)
    layers = tuple(_build_layer(rng, config) for _ in range(config.num_layers))
    unembedding = rng.standard_normal((config.d, config.vocab_size)) * (
        LOGIT_STD / np.sqrt(config.d)
    )
    log.debug(
        "Built toy model: d=%d d_h=%d layers=%d heads=%d/%d seed=%d.",
        config.d,
        config.d_h,
        config.num_layers,
        config.n_q_heads,
        config.n_kv_heads,
        seed,
    )
    return ToyModel(
        id_=model_id,
        embedding=embedding,
        layers=layers,
        ln_f_gain=np.ones(config.d, dtype=F32),
        ln_f_bias=np.zeros(config.d, dtype=F32),
        unembedding=unembedding.astype(F32),
    )


def layer_norm(x: npt.NDArray[np.float32], gain: Weights, bias: Weights) -> Matrix:
    mean = x.mean(axis=-1, keepdims=True, dtype=F32)
    var = ((x - mean) ** 2).mean(axis=-1, keepdims=True, dtype=F32)
    return ((x - mean) / np.sqrt(var + F32(LAYER_NORM_EPS)) * gain + bias).astype(F32)


def mlp(layer: LayerWeights, x: Matrix) -> Matrix:
    hidden = np.maximum(x @ layer.w_1 + layer.b_1, F32(0.0))
    return (hidden @ layer.w_2 + layer.b_2).astype(F32)


def per_head(x: Matrix, w: Weights) -> npt.NDArray[np.float32]:
    """x (n, d) times each (d, d_h) head slice -> (heads, n, d_h)."""
    return np.stack([x @ w_h for w_h in w]).astype(F32, copy=False)


def qkv(
    model: ToyModel,
    layer: LayerWeights,
    x: Matrix,
    start: int,
    absorbed: bool = False,
) -> tuple[npt.NDArray[np.float32], ...]:
    """
    Queries and keys after RoPE for rows at positions start, start+1, ...
    Values come from Ŵ_V when `absorbed` is set.
    """
    theta = model.config.theta_base
    q = per_head(x, layer.w_q)
    k = per_head(x, layer.w_k)
    w_v = layer.w_v_hat if absorbed and layer.w_v_hat is not None else layer.w_v
    v = per_head(x, w_v)
    q = np.stack([rope_sequence(h, start, theta) for h in q])
    k = np.stack([rope_sequence(h, start, theta) for h in k])
    return q, k, v


def output_matrix(layer: LayerWeights, absorbed: bool = False) -> Matrix:
    """(n_q_heads·d_h, d) output weights, absorbed or original."""
    w_o = layer.w_o_hat if absorbed and layer.w_o_hat is not None else layer.w_o
    return w_o.reshape(-1, w_o.shape[-1])


def causal_attention(
    q: npt.NDArray[np.float32],
    k: npt.NDArray[np.float32],
    v: npt.NDArray[np.float32],
) -> npt.NDArray[np.float32]:
    """
    Full-sequence masked attention for one head: (n, d_h) each. Used by the
    calibration pass; decoding goes through the attention kernels instead.
    """
    n, d_h = q.shape
    scores = (q @ k.T) / F32(np.sqrt(d_h))
    scores = np.where(np.tri(n, dtype=bool), scores, F32(-np.inf))
    scores = scores - scores.max(axis=1, keepdims=True)
    weights = np.exp(scores)
    weights /= weights.sum(axis=1, keepdims=True)
    return (weights @ v).astype(F32)


def forward_trace(
    model: ToyModel,
    tokens: npt.NDArray[np.int64],
) -> list[tuple[npt.NDArray[np.float32], ...]]:
    """
    One batched causal pass over `tokens`. Returns per layer the post-RoPE
    queries (n_q, n, d_h), post-RoPE keys (n_kv, n, d_h) and values
    (n_kv, n, d_h).
    """
    cfg = model.config
    h = model.embedding[tokens]
    trace = []
    for layer in model.layers:
        x = layer_norm(h, layer.ln1_gain, layer.ln1_bias)
        q, k, v = qkv(model, layer, x, 0)
        trace.append((q, k, v))
        heads = [
            causal_attention(q[j], k[cfg.kv_head_of(j)], v[cfg.kv_head_of(j)])
            for j in range(cfg.n_q_heads)
        ]
        h = h + np.concatenate(heads, axis=1) @ output_matrix(layer)
        h = h + mlp(layer, layer_norm(h, layer.ln2_gain, layer.ln2_bias))
    return trace


def attach_projections(model: ToyModel, projections: ProjectionSet) -> ToyModel:
    """
    Returns a copy of `model` carrying Ŵ_V and Ŵ_O for every layer and the
    projection set used for runtime P_QK.

    :raises RejectedConfigurationError:
    """
    if not projections.matches(model.config):
        raise RejectedConfigurationError(
            f"Projection set was calibrated for {projections.config!r}, "
            f"model is {model.config!r}.",
        )
    layers = []
    for i, layer in enumerate(model.layers):
        w_v_hat = np.stack(
            [
                absorb_value_projection(layer.w_v[h], projections.vo(i, h))
                for h in range(model.config.n_kv_heads)
            ],
        )
        w_o_hat = absorb_output_projection(output_matrix(layer), projections, i)
        layers.append(
            replace(
                layer,
                w_v_hat=w_v_hat,
                w_o_hat=w_o_hat.reshape(layer.w_o.shape),
            ),
        )
    return replace(model, layers=tuple(layers), projections=projections)


def expand_to_mha(model: ToyModel) -> ToyModel:
    """
    Replicates each KV head across its query heads so the result has
    n_kv_heads == n_q_heads and computes the same function.
    """
    cfg = model.config
    heads = [cfg.kv_head_of(j) for j in range(cfg.n_q_heads)]
    mha = replace(cfg, n_kv_heads=cfg.n_q_heads)
    layers = tuple(
        replace(
            layer,
            w_k=layer.w_k[heads],
            w_v=layer.w_v[heads],
            w_v_hat=None if layer.w_v_hat is None else layer.w_v_hat[heads],
        )
        for layer in model.layers
    )
    projections = None
    if model.projections is not None:
        projections = replace(
            model.projections,
            config=mha,
            p_qk=model.projections.p_qk[:, heads],
            p_vo=model.projections.p_vo[:, heads],
        )
    return ToyModel(
        id_=ModelId(config=mha, seed=model.seed),
        embedding=model.embedding,
        layers=layers,
        ln_f_gain=model.ln_f_gain,
        ln_f_bias=model.ln_f_bias,
        unembedding=model.unembedding,
        projections=projections,
    )
