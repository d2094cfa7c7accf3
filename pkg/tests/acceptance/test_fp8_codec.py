import numpy as np

from swankv.domain.services.fp8 import decode_fp8, encode_fp8

SAMPLES = 100_000


def reference_encode(x: np.ndarray) -> np.ndarray:
    """Nearest finite e4m3 magnitude by table search; ties pick the even code."""
    positive = np.arange(0x7F, dtype=np.uint8)  # 0x00..0x7E, increasing
    magnitudes = decode_fp8(positive).astype(np.float64)
    a = np.minimum(np.abs(x.astype(np.float64)), magnitudes[-1])

    upper = np.clip(np.searchsorted(magnitudes, a), 0, positive.size - 1)
    lower = np.maximum(upper - 1, 0)
    below = a - magnitudes[lower]
    above = magnitudes[upper] - a
    pick_upper = (above < below) | ((above == below) & (upper % 2 == 0))
    code = np.where(pick_upper, upper, lower).astype(np.uint8)
    return code | np.where(np.signbit(x), 0x80, 0).astype(np.uint8)


def test_every_code_round_trips():
    codes = np.arange(256, dtype=np.uint8)

    np.testing.assert_array_equal(encode_fp8(decode_fp8(codes)), codes)


def test_encoding_matches_reference_rounding():
    rng = np.random.default_rng(8)
    scales = np.exp2(rng.uniform(-12, 10, SAMPLES))
    x = (rng.standard_normal(SAMPLES) * scales).astype(np.float32)
    # exact midpoints between neighbouring codes
    grid = decode_fp8(np.arange(0x7F, dtype=np.uint8)).astype(np.float64)
    midpoints = ((grid[:-1] + grid[1:]) / 2).astype(np.float32)
    x = np.concatenate([x, midpoints, -midpoints, np.float32([0.0, -0.0, 500.0])])

    np.testing.assert_array_equal(encode_fp8(x), reference_encode(x))
