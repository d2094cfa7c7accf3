import numpy as np
import pytest

from swankv.domain.enums.decode_mode import DecodeMode
from swankv.domain.exceptions.numerics import RejectedConfigurationError
from swankv.domain.services.calibration import identity_projection_set
from swankv.domain.services.runtime import DecodeSession
from swankv.domain.services.toy_model import (
    TAIL_SCALE,
    VALUE_TAIL_SCALE,
    attach_projections,
    build_toy_model,
    causal_attention,
    expand_to_mha,
    forward_trace,
    head_scales,
    value_dim_scales,
)


def test_head_scales():
    np.testing.assert_allclose(head_scales(8), [1.6, 1.025, 0.45, TAIL_SCALE])


def test_value_scales_are_distinct():
    scales = value_dim_scales(16)

    assert len(set(scales.tolist())) == 13
    assert scales[-1] == VALUE_TAIL_SCALE
    assert (np.diff(scales) <= 0).all()


def test_key_spectrum_drops_after_three_quarters(mha_config, gqa_config):
    for cfg in (mha_config, gqa_config):
        model = build_toy_model(cfg, seed=1)
        tail = 3 * cfg.d_h // 4

        for layer in model.layers:
            for w_k in layer.w_k:
                sigma = np.linalg.svd(w_k.astype(np.float64), compute_uv=False)
                assert sigma[tail] / sigma[0] < 0.1


def test_build_is_deterministic(gqa_config):
    first = build_toy_model(gqa_config, seed=3).tensors()
    again = build_toy_model(gqa_config, seed=3).tensors()
    other = build_toy_model(gqa_config, seed=4).tensors()

    for name, array in first.items():
        np.testing.assert_array_equal(array, again[name])
    assert not np.array_equal(first["layers.0.w_q"], other["layers.0.w_q"])


def test_weight_shapes(sample_model):
    layer = sample_model.layers[0]

    assert layer.w_q.shape == (4, 32, 8)
    assert layer.w_k.shape == (2, 32, 8)
    assert layer.w_o.shape == (4, 8, 32)
    assert sample_model.embedding.shape == (256, 32)


def test_forward_trace_shapes(sample_model):
    trace = forward_trace(sample_model, np.arange(10))

    assert len(trace) == 2
    q, k, v = trace[1]
    assert q.shape == (4, 10, 8)
    assert k.shape == v.shape == (2, 10, 8)


def test_causal_attention_first_row_sees_only_itself(rng):
    q, k, v = rng.standard_normal((3, 5, 8)).astype(np.float32)

    out = causal_attention(q, k, v)

    np.testing.assert_allclose(out[0], v[0], rtol=1e-6)


def test_expand_to_mha_computes_same_function(sample_model):
    mha = expand_to_mha(sample_model)
    grouped = DecodeSession(sample_model, DecodeMode.BASELINE)
    expanded = DecodeSession(mha, DecodeMode.BASELINE)

    assert mha.config.n_kv_heads == 4
    assert not mha.config.is_gqa
    for token in (65, 66, 67, 68):
        np.testing.assert_allclose(
            grouped.step(token),
            expanded.step(token),
            rtol=0,
            atol=1e-5,
        )


def test_expand_to_mha_replicates_projections(sample_model, sample_projections):
    mha = expand_to_mha(attach_projections(sample_model, sample_projections))

    assert mha.projections is not None
    np.testing.assert_array_equal(mha.projections.qk(0, 1), sample_projections.qk(0, 0))
    np.testing.assert_array_equal(mha.projections.qk(0, 2), sample_projections.qk(0, 1))


def test_attach_projections_absorbs_values(sample_model, sample_projections):
    absorbed = attach_projections(sample_model, sample_projections)
    layer = absorbed.layers[1]

    assert absorbed.projections is sample_projections
    assert layer.w_v_hat is not None
    np.testing.assert_allclose(
        layer.w_v_hat[0],
        sample_model.layers[1].w_v[0] @ sample_projections.vo(1, 0),
        rtol=1e-5,
        atol=1e-6,
    )


def test_attach_projections_rejects_other_model(sample_model, mha_config):
    with pytest.raises(RejectedConfigurationError):
        attach_projections(sample_model, identity_projection_set(mha_config))
