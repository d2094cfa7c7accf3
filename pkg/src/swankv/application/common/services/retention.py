"""
Retention ratios (k_active / d_h) and their integer k counterparts.
"""

from fractions import Fraction
from typing import Final

from swankv.domain.enums.precision import Precision
from swankv.domain.exceptions.numerics import RejectedInputError
from swankv.domain.value_objects.cache_params import CacheParams

SPLIT_GRID: Final[tuple[float, ...]] = tuple(i / 10 for i in range(1, 10))


def retention_to_k(ratio: float, d_h: int) -> int:
    """
    k = round(ratio·d_h) with exact halves going to the even k. The ratio is
    read through its decimal repr, so 0.35·10 rounds as 3.5 rather than
    3.4999….

    :raises RejectedInputError:
    """
    if not 0.0 <= ratio <= 1.0:
        raise RejectedInputError(f"Retention ratio must lie in [0, 1], got {ratio}.")
    return round(Fraction(repr(ratio)) * d_h)


def symmetric_params(
    ratio: float,
    d_h: int,
    buffer: int,
    precision: Precision,
) -> CacheParams:
    """
    :raises RejectedInputError:
    """
    k = retention_to_k(ratio, d_h)
    return CacheParams(k_key=k, k_value=k, buffer=buffer, precision=precision)


def split_params(
    key_ratio: float,
    d_h: int,
    buffer: int,
    precision: Precision,
) -> CacheParams:
    """
    Fixed budget k_key + k_value = d_h, `key_ratio` of it spent on keys.

    :raises RejectedInputError:
    """
    k_key = retention_to_k(key_ratio, d_h)
    return CacheParams(
        k_key=k_key,
        k_value=d_h - k_key,
        buffer=buffer,
        precision=precision,
    )
