"""
e4m3 (1 sign, 4 exponent bits with bias 7, 3 mantissa bits) codec.

No infinities; 0x7F / 0xFF are NaN and the largest finite magnitude is 448.
Encoding rounds to nearest, ties to even, and saturates at ±448.
"""

from typing import Final

import numpy as np
import numpy.typing as npt

from swankv.domain.types import F32, Codes

FP8_MAX: Final[float] = 448.0
FP8_MIN_NORMAL: Final[float] = 2.0**-6
FP8_NAN: Final[int] = 0x7F
_SIGN_BIT: Final[int] = 0x80
_EXPONENT_BIAS: Final[int] = 7
_MANTISSA_BITS: Final[int] = 3
# subnormal step is 2^-9
_SUBNORMAL_SCALE: Final[float] = 2.0**9


def _build_decode_table() -> npt.NDArray[np.float32]:
    codes = np.arange(256, dtype=np.int64)
    sign = np.where(codes & _SIGN_BIT, -1.0, 1.0)
    exponent = (codes >> _MANTISSA_BITS) & 0xF
    mantissa = codes & 0x7
    magnitude = np.where(
        exponent == 0,
        mantissa / _SUBNORMAL_SCALE,
        (1.0 + mantissa / 8.0) * np.exp2(exponent - _EXPONENT_BIAS),
    )
    table = sign * magnitude
    table[(exponent == 0xF) & (mantissa == 0x7)] = np.nan
    table[_SIGN_BIT | FP8_NAN] = np.copysign(np.nan, -1.0)
    return table.astype(F32)


DECODE_TABLE: Final[npt.NDArray[np.float32]] = _build_decode_table()
DECODE_TABLE.setflags(write=False)


def decode_fp8(codes: npt.ArrayLike) -> npt.NDArray[np.float32]:
    """Exact decode of e4m3 codes to f32."""
    return DECODE_TABLE[np.asarray(codes, dtype=np.uint8)]


def encode_fp8(x: npt.ArrayLike) -> Codes:
    """
    Round-to-nearest-even e4m3 encoding. Magnitudes above 448 saturate;
    NaN maps to the 0x7F sentinel (0xFF when its sign bit is set).
    """
    x_ = np.asarray(x, dtype=F32)
    sign = np.signbit(x_)
    nan = np.isnan(x_)
    a = np.minimum(np.abs(np.where(nan, F32(0.0), x_)).astype(np.float64), FP8_MAX)

    subnormal = np.rint(a * _SUBNORMAL_SCALE)
    _, exp2 = np.frexp(np.where(a > 0, a, 1.0))
    e_unbiased = exp2.astype(np.int64) - 1
    scaled = np.rint(np.ldexp(a, _MANTISSA_BITS - e_unbiased))
    normal = ((e_unbiased + _EXPONENT_BIAS) << _MANTISSA_BITS) + (
        scaled.astype(np.int64) - 8
    )

    code = np.where(a < FP8_MIN_NORMAL, subnormal.astype(np.int64), normal)
    code = np.where(nan, FP8_NAN, code)
    code = code | np.where(sign, _SIGN_BIT, 0)
    return code.astype(np.uint8)


def is_fp8_nan(codes: npt.ArrayLike) -> npt.NDArray[np.bool_]:
    return (np.asarray(codes, dtype=np.uint8) & 0x7F) == FP8_NAN


FP16_MAX: Final[float] = float(np.finfo(np.float16).max)


def encode_fp16(x: npt.ArrayLike) -> npt.NDArray[np.float16]:
    """Round-to-nearest-even cast, saturating at the largest finite fp16."""
    x_ = np.asarray(x, dtype=F32)
    return np.clip(x_, -FP16_MAX, FP16_MAX).astype(np.float16)
