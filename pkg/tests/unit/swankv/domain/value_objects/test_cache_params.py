import pytest

from swankv.domain.enums.precision import Precision
from swankv.domain.exceptions.numerics import RejectedInputError
from swankv.domain.value_objects.cache_params import CacheParams
from swankv.domain.value_objects.memory_model import MemoryModel


@pytest.mark.parametrize(
    ("k_key", "k_value", "buffer", "expected_exception"),
    [
        pytest.param(4, 4, 0, None, id="symmetric"),
        pytest.param(0, 8, 16, None, id="zero_keys"),
        pytest.param(-1, 4, 0, RejectedInputError, id="negative_k_key"),
        pytest.param(4, -1, 0, RejectedInputError, id="negative_k_value"),
        pytest.param(4, 4, -1, RejectedInputError, id="negative_buffer"),
    ],
)
def test_cache_params_init(k_key, k_value, buffer, expected_exception):
    if not expected_exception:
        CacheParams(k_key=k_key, k_value=k_value, buffer=buffer)

    else:
        with pytest.raises(expected_exception):
            CacheParams(k_key=k_key, k_value=k_value, buffer=buffer)


def test_check_head_dim():
    params = CacheParams(k_key=8, k_value=4, buffer=0)

    params.check_head_dim(8)

    with pytest.raises(RejectedInputError):
        params.check_head_dim(6)


def test_lossless():
    params = CacheParams.lossless(16, buffer=3)

    assert params == CacheParams(
        k_key=16,
        k_value=16,
        buffer=3,
        precision=Precision.F32,
    )


@pytest.mark.parametrize(
    ("precision", "k", "sparse", "dense"),
    [
        pytest.param(Precision.FP16, 64, 194, 256, id="fp16"),
        pytest.param(Precision.FP8, 64, 130, 256, id="fp8"),
        pytest.param(Precision.F32, 64, 322, 512, id="f32"),
        pytest.param(Precision.FP16, 0, 2, 256, id="empty"),
    ],
)
def test_memory_model(precision, k, sparse, dense):
    model = MemoryModel(d_h=128, k_active=k, precision=precision)

    assert model.bytes_per_sparse_vector == sparse
    assert model.bytes_per_dense_vector == dense
    assert model.compression_ratio == sparse / dense
    assert model.retention == k / 128


def test_memory_model_rejects_k_above_head_dim():
    with pytest.raises(RejectedInputError):
        MemoryModel(d_h=8, k_active=9, precision=Precision.FP16)
