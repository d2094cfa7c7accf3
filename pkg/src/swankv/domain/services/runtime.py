"""
Token-by-token decode loop over a toy model, in baseline (dense f32 cache)
or SWAN (hybrid cache, runtime P_QK, absorbed Ŵ_V / Ŵ_O) mode. The prompt
goes through the same path as generated tokens.
"""

import logging
import math
from collections.abc import Sequence

import numpy as np
import numpy.typing as npt

from swankv.domain.entities.hybrid_kv_cache import DenseKVCache, HybridKVCache
from swankv.domain.entities.toy_model import ToyModel
from swankv.domain.enums.decode_mode import DecodeMode
from swankv.domain.exceptions.numerics import (
    RejectedConfigurationError,
    RejectedInputError,
)
from swankv.domain.services import sparse_cache
from swankv.domain.services.attention import dense_attention_step, swan_attention_step
from swankv.domain.services.flops import (
    FlopsCounter,
    flops_standard,
    flops_swan_group,
)
from swankv.domain.services.toy_model import (
    attach_projections,
    layer_norm,
    mlp,
    output_matrix,
    qkv,
)
from swankv.domain.types import F32
from swankv.domain.value_objects.attention_step import AttentionStepInput
from swankv.domain.value_objects.cache_footprint import CacheFootprint
from swankv.domain.value_objects.cache_params import CacheParams
from swankv.domain.value_objects.cache_slot import CacheSlot
from swankv.domain.value_objects.flops_report import FlopsReport
from swankv.domain.value_objects.projection_set import ProjectionSet
from swankv.domain.value_objects.run_metrics import RunMetrics, StepMetrics

log = logging.getLogger(__name__)

Activations = npt.NDArray[np.float32]


class DecodeSession:
    """
    Incremental forward pass: one `step(token)` per position, each returning
    the next-token logits. Owns its caches and FLOPs counter.
    """

    def __init__(
        self,
        model: ToyModel,
        mode: DecodeMode,
        params: CacheParams | None = None,
    ):
        """
        :raises RejectedConfigurationError:
        :raises RejectedInputError:
        """
        cfg = model.config
        self.model = model
        self.mode = mode
        self.params = params or CacheParams.lossless(cfg.d_h)
        self.params.check_head_dim(cfg.d_h)
        self.counter = FlopsCounter()
        self.position = 0
        self.last_attention: list[Activations] = []

        slots = [
            [CacheSlot(layer=i, kv_head=h) for h in range(cfg.n_kv_heads)]
            for i in range(cfg.num_layers)
        ]
        self.hybrid: list[list[HybridKVCache]] = []
        self.dense: list[list[DenseKVCache]] = []
        if mode is DecodeMode.SWAN:
            if model.projections is None:
                raise RejectedConfigurationError(
                    "SWAN decoding needs a model with attached projections.",
                )
            self.projections: ProjectionSet = model.projections
            self.hybrid = [
                [sparse_cache.create_cache(s, cfg.d_h, self.params) for s in row]
                for row in slots
            ]
        else:
            self.dense = [
                [DenseKVCache(id_=s, d_h=cfg.d_h) for s in row] for row in slots
            ]

    def footprint(self) -> CacheFootprint:
        if self.mode is DecodeMode.SWAN:
            total = CacheFootprint(sparse_k=0, sparse_v=0, buffer_k=0, buffer_v=0)
            for row in self.hybrid:
                for cache in row:
                    total = total + sparse_cache.memory_footprint(cache)
            return total
        half = sum(c.nbytes for row in self.dense for c in row) // 2
        return CacheFootprint(sparse_k=0, sparse_v=0, buffer_k=half, buffer_v=half)

    def step(self, token: int) -> Activations:
        """
        :raises RejectedInputError:
        """
        model = self.model
        vocab = model.config.vocab_size
        if not 0 <= token < vocab:
            raise RejectedInputError(f"Token {token} outside [0, {vocab}).")
        swan = self.mode is DecodeMode.SWAN
        h = model.embedding[token][None, :]
        self.last_attention = []
        for i, layer in enumerate(model.layers):
            x = layer_norm(h, layer.ln1_gain, layer.ln1_bias)
            q, k, v = qkv(model, layer, x, self.position, absorbed=swan)
            attend = self._swan_heads if swan else self._dense_heads
            heads = attend(i, q, k, v)
            attn = heads.reshape(1, -1) @ output_matrix(layer, absorbed=swan)
            self.last_attention.append(attn[0])
            h = h + attn
            h = h + mlp(layer, layer_norm(h, layer.ln2_gain, layer.ln2_bias))
        self.position += 1
        logits = layer_norm(h, model.ln_f_gain, model.ln_f_bias) @ model.unembedding
        return logits[0].astype(F32)

    def _swan_heads(
        self,
        layer: int,
        q: Activations,
        k: Activations,
        v: Activations,
    ) -> Activations:
        cfg = self.model.config
        group = cfg.group_size
        out = np.empty((cfg.n_q_heads, cfg.d_h), dtype=F32)
        for h, cache in enumerate(self.hybrid[layer]):
            block = slice(h * group, (h + 1) * group)
            result = swan_attention_step(
                AttentionStepInput(
                    q_new=q[block, 0],
                    k_new=k[h, 0],
                    v_new=v[h, 0],
                    position=self.position,
                    layer=layer,
                    kv_head=h,
                ),
                cache,
                self.projections.qk(layer, h),
                self.counter,
            )
            out[block] = result.output
        return out

    def _dense_heads(
        self,
        layer: int,
        q: Activations,
        k: Activations,
        v: Activations,
    ) -> Activations:
        cfg = self.model.config
        caches = self.dense[layer]
        for h, cache in enumerate(caches):
            cache.append(k[h, 0], v[h, 0])
        out = np.empty((cfg.n_q_heads, cfg.d_h), dtype=F32)
        for j in range(cfg.n_q_heads):
            cache = caches[cfg.kv_head_of(j)]
            out[j] = dense_attention_step(
                q[j, 0],
                cache.keys.view(),
                cache.values.view(),
                self.counter,
            )
        return out


def prepare_model(
    model: ToyModel,
    mode: DecodeMode,
    projections: ProjectionSet | None,
) -> ToyModel:
    """
    Attaches `projections` for SWAN mode unless the model already carries
    them.

    :raises RejectedConfigurationError:
    """
    if mode is DecodeMode.BASELINE:
        return model
    if projections is not None and projections is not model.projections:
        return attach_projections(model, projections)
    if model.projections is None:
        raise RejectedConfigurationError("SWAN mode requires a projection set.")
    return model


def _check_tokens(tokens: Sequence[int], minimum: int, what: str) -> list[int]:
    stream = [int(t) for t in tokens]
    if len(stream) < minimum:
        raise RejectedInputError(f"{what} needs at least {minimum} tokens.")
    return stream


def _step_report(
    session: DecodeSession,
    length: int,
    measured_standard: int,
    measured_swan: int,
) -> FlopsReport:
    cfg = session.model.config
    p = session.params
    standard = flops_standard(length, cfg.d_h)
    swan = flops_swan_group(
        length, cfg.d_h, p.k_key, p.k_value, p.buffer, cfg.group_size
    )
    return FlopsReport(
        length=length,
        d_h=cfg.d_h,
        k_active=p.k_key,
        buffer=p.buffer,
        modeled_standard=cfg.num_layers * cfg.n_q_heads * standard,
        modeled_swan=cfg.num_layers * cfg.n_kv_heads * swan,
        measured_standard=measured_standard,
        measured_swan=measured_swan,
    )


def decode(
    model: ToyModel,
    prompt: Sequence[int],
    steps: int,
    mode: DecodeMode,
    params: CacheParams | None = None,
    projections: ProjectionSet | None = None,
) -> tuple[tuple[int, ...], RunMetrics]:
    """
    Greedy (argmax) decoding. Every prompt token and every generated token
    is stepped through the cache, so metrics hold one entry per token. In
    SWAN mode a baseline shadow consumes the same tokens to measure logit
    drift and standard-attention FLOPs.

    :raises RejectedConfigurationError:
    :raises RejectedInputError:
    """
    tokens = _check_tokens(prompt, 1, "Decoding")
    if steps < 0:
        raise RejectedInputError(f"Step count must be >= 0, got {steps}.")
    model = prepare_model(model, mode, projections)
    main = DecodeSession(model, mode, params)
    shadow = None
    if mode is DecodeMode.SWAN:
        shadow = DecodeSession(model, DecodeMode.BASELINE)
    log.info(
        "Decode (%s): prompt %d tokens, %d steps, params %r.",
        mode,
        len(tokens),
        steps,
        main.params,
    )

    generated: list[int] = []
    records: list[StepMetrics] = []
    for i in range(len(tokens) + steps):
        token = tokens[i] if i < len(tokens) else generated[-1]
        before = main.counter.total
        logits = main.step(token)
        spent = main.counter.total - before
        drift_max = drift_l2 = 0.0
        standard = spent if shadow is None else 0
        if shadow is not None:
            shadow_before = shadow.counter.total
            reference = shadow.step(token)
            standard = shadow.counter.total - shadow_before
            diff = logits.astype(np.float64) - reference.astype(np.float64)
            drift_max = float(np.abs(diff).max())
            drift_l2 = float(np.sqrt(np.sum(diff**2)))
        records.append(
            StepMetrics(
                length=i + 1,
                token=token,
                flops=_step_report(
                    main,
                    i + 1,
                    measured_standard=standard,
                    measured_swan=spent if shadow is not None else 0,
                ),
                cache_bytes=main.footprint().total,
                drift_max_abs=drift_max,
                drift_l2=drift_l2,
            ),
        )
        if i >= len(tokens) - 1 and len(generated) < steps:
            generated.append(int(np.argmax(logits)))

    metrics = RunMetrics(
        steps=tuple(records),
        prompt_length=len(tokens),
        tokens_generated=len(generated),
    )
    log.info("Decode (%s): done, max drift %.3e.", mode, metrics.max_drift)
    return tuple(generated), metrics


def _log_softmax(logits: Activations) -> npt.NDArray[np.float64]:
    shifted = logits.astype(np.float64) - float(logits.max())
    return shifted - math.log(float(np.exp(shifted).sum()))


def perplexity(
    model: ToyModel,
    text: Sequence[int],
    mode: DecodeMode,
    params: CacheParams | None = None,
    projections: ProjectionSet | None = None,
) -> float:
    """
    exp(mean negative log-likelihood) of text[1:] under teacher forcing,
    attention served by the selected cache mode.

    :raises RejectedConfigurationError:
    :raises RejectedInputError:
    """
    tokens = _check_tokens(text, 2, "Perplexity")
    session = DecodeSession(prepare_model(model, mode, projections), mode, params)
    nll = 0.0
    for current, target in zip(tokens[:-1], tokens[1:], strict=True):
        nll -= float(_log_softmax(session.step(current))[target])
    return math.exp(nll / (len(tokens) - 1))


def reference_perplexity(
    model: ToyModel,
    text: Sequence[int],
    mode: DecodeMode,
    params: CacheParams | None = None,
    projections: ProjectionSet | None = None,
    context: int = 1,
) -> float:
    """
    exp(mean cross-entropy) of the selected mode's next-token distributions
    against the baseline model's, over the predictions of text[context:]
    under teacher forcing. Never below the baseline's own exp(entropy), and
    equal to it when the cache is lossless.

    :raises RejectedConfigurationError:
    :raises RejectedInputError:
    """
    tokens = _check_tokens(text, 2, "Reference perplexity")
    if not 1 <= context < len(tokens):
        raise RejectedInputError(
            f"Context must lie in [1, {len(tokens) - 1}], got {context}.",
        )
    session = DecodeSession(prepare_model(model, mode, projections), mode, params)
    reference = DecodeSession(model, DecodeMode.BASELINE)
    cross_entropy = 0.0
    for i, token in enumerate(tokens[:-1]):
        log_q = _log_softmax(session.step(token))
        log_p = _log_softmax(reference.step(token))
        if i + 1 >= context:
            cross_entropy -= float(np.exp(log_p) @ log_q)
    return math.exp(cross_entropy / (len(tokens) - context))


def layer_attention_outputs(
    model: ToyModel,
    tokens: Sequence[int],
    mode: DecodeMode,
    params: CacheParams | None = None,
    projections: ProjectionSet | None = None,
) -> Activations:
    """
    Attention-block outputs (after the output projection) per layer and
    token: shape (num_layers, n, d).

    :raises RejectedConfigurationError:
    :raises RejectedInputError:
    """
    stream = _check_tokens(tokens, 1, "Layer outputs")
    session = DecodeSession(prepare_model(model, mode, projections), mode, params)
    per_token = []
    for token in stream:
        session.step(token)
        per_token.append(np.stack(session.last_attention))
    return np.stack(per_token, axis=1).astype(F32)


def greedy_continuation(
    model: ToyModel,
    prompt: Sequence[int],
    steps: int,
) -> list[int]:
    """Prompt followed by `steps` baseline greedy tokens."""
    generated, _ = decode(model, prompt, steps, DecodeMode.BASELINE)
    return [*prompt, *generated]
