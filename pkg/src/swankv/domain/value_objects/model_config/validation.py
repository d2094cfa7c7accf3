import math

from swankv.domain.exceptions.numerics import RejectedConfigurationError
from swankv.domain.value_objects.model_config.constants import HEAD_DIM_MAX


def validate_positive(name: str, value: int) -> None:
    if value < 1:
        raise RejectedConfigurationError(f"{name} must be >= 1, got {value}.")


def validate_head_dim(d_h: int) -> None:
    """
    :raises RejectedConfigurationError:
    """
    if d_h % 2:
        raise RejectedConfigurationError(
            f"Head dimension must be even for RoPE, got {d_h}.",
        )
    if d_h > HEAD_DIM_MAX:
        raise RejectedConfigurationError(
            f"Head dimension must not exceed {HEAD_DIM_MAX}, got {d_h}.",
        )


def validate_head_counts(d: int, d_h: int, n_q_heads: int, n_kv_heads: int) -> None:
    """
    :raises RejectedConfigurationError:
    """
    if n_q_heads % n_kv_heads:
        raise RejectedConfigurationError(
            f"Query heads ({n_q_heads}) must be divisible by "
            f"KV heads ({n_kv_heads}).",
        )
    if d != n_q_heads * d_h:
        raise RejectedConfigurationError(
            f"Model width {d} must equal n_q_heads * d_h = {n_q_heads * d_h}.",
        )


def validate_theta_base(theta_base: float) -> None:
    if not math.isfinite(theta_base) or theta_base <= 1.0:
        raise RejectedConfigurationError(
            f"RoPE theta base must be finite and > 1, got {theta_base}.",
        )
