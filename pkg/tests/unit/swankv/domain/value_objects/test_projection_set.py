import numpy as np
import pytest

from swankv.domain.enums.projection_variant import ProjectionVariant
from swankv.domain.exceptions.base import DomainFieldError
from swankv.domain.services.tensor import random_orthogonal
from swankv.domain.value_objects.projection_set import (
    CalibrationMetadata,
    ProjectionSet,
    stacked_orthogonality_residual,
)

METADATA = CalibrationMetadata(seed=1, token_count=10, corpus_id="x")


def _stack(config, seed=0):
    heads = range(config.n_kv_heads)
    return np.stack([
        [random_orthogonal(config.d_h, seed + 10 * i + h) for h in heads]
        for i in range(config.num_layers)
    ])


def test_projection_set_accessors(gqa_config):
    p_qk, p_vo = _stack(gqa_config), _stack(gqa_config, seed=100)

    projections = ProjectionSet(
        config=gqa_config,
        p_qk=p_qk,
        p_vo=p_vo,
        variant=ProjectionVariant.RANDOM,
        metadata=METADATA,
    )

    np.testing.assert_array_equal(projections.qk(1, 0), p_qk[1, 0])
    np.testing.assert_array_equal(projections.vo(0, 1), p_vo[0, 1])
    assert projections.matches(gqa_config)
    assert stacked_orthogonality_residual(projections.p_qk) < 1e-5


def test_projection_set_rejects_wrong_shape(gqa_config, mha_config):
    with pytest.raises(DomainFieldError):
        ProjectionSet(
            config=mha_config,
            p_qk=_stack(gqa_config),
            p_vo=_stack(gqa_config),
            variant=ProjectionVariant.RANDOM,
            metadata=METADATA,
        )


def test_projection_set_rejects_non_orthogonal(gqa_config):
    p_qk = _stack(gqa_config)
    p_qk[0, 0] *= 1.01

    with pytest.raises(DomainFieldError):
        ProjectionSet(
            config=gqa_config,
            p_qk=p_qk,
            p_vo=_stack(gqa_config),
            variant=ProjectionVariant.RANDOM,
            metadata=METADATA,
        )


def test_metadata_seed_range():
    with pytest.raises(DomainFieldError):
        CalibrationMetadata(seed=-1, token_count=0, corpus_id="")

    with pytest.raises(DomainFieldError):
        CalibrationMetadata(seed=2**64, token_count=0, corpus_id="")


@pytest.mark.parametrize("variant", list(ProjectionVariant))
def test_variant_code_round_trip(variant):
    assert ProjectionVariant.from_code(variant.code) is variant


def test_variant_unknown_code():
    with pytest.raises(ValueError):
        ProjectionVariant.from_code(len(ProjectionVariant))
