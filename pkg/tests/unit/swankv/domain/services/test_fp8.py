import numpy as np
import pytest

from swankv.domain.services.fp8 import (
    FP8_MAX,
    FP16_MAX,
    decode_fp8,
    encode_fp8,
    encode_fp16,
    is_fp8_nan,
)


@pytest.mark.parametrize(
    ("value", "code"),
    [
        pytest.param(0.0, 0x00, id="zero"),
        pytest.param(-0.0, 0x80, id="negative_zero"),
        pytest.param(1.0, 0x38, id="one"),
        pytest.param(-2.0, 0xC0, id="minus_two"),
        pytest.param(448.0, 0x7E, id="max"),
        pytest.param(2.0**-9, 0x01, id="smallest_subnormal"),
        pytest.param(2.0**-6, 0x08, id="smallest_normal"),
        pytest.param(1.0625, 0x38, id="tie_to_even_down"),
        pytest.param(1.1875, 0x3A, id="tie_to_even_up"),
    ],
)
def test_encode_known_values(value, code):
    assert int(encode_fp8(np.float32(value))) == code


def test_encode_saturates():
    codes = encode_fp8(np.array([1e6, -1e6, 500.0], dtype=np.float32))

    np.testing.assert_array_equal(decode_fp8(codes), [FP8_MAX, -FP8_MAX, FP8_MAX])


def test_nan_sentinel():
    codes = encode_fp8(np.array([np.nan, -np.nan], dtype=np.float32))

    assert is_fp8_nan(codes).all()
    assert np.isnan(decode_fp8(codes)).all()
    assert not is_fp8_nan(encode_fp8(np.float32(448.0)))


def test_decode_is_exact_on_representable_values():
    finite = np.array([c for c in range(256) if c & 0x7F != 0x7F], dtype=np.uint8)

    values = decode_fp8(finite)

    np.testing.assert_array_equal(encode_fp8(values), finite)


def test_encode_fp16_saturates():
    out = encode_fp16(np.array([1e9, -1e9, 0.5], dtype=np.float32))

    assert out.dtype == np.float16
    np.testing.assert_array_equal(out, [FP16_MAX, -FP16_MAX, 0.5])
