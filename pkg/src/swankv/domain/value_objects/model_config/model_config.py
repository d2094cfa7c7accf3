from dataclasses import dataclass

from swankv.domain.value_objects.base import ValueObject
from swankv.domain.value_objects.model_config.constants import (
    THETA_BASE_DEFAULT,
    VOCAB_SIZE_DEFAULT,
)
from swankv.domain.value_objects.model_config.validation import (
    validate_head_counts,
    validate_head_dim,
    validate_positive,
    validate_theta_base,
)


@dataclass(frozen=True, repr=False, kw_only=True)
class ModelConfig(ValueObject):
    """raises RejectedConfigurationError"""

    d: int
    d_h: int
    num_layers: int
    n_q_heads: int
    n_kv_heads: int
    theta_base: float = THETA_BASE_DEFAULT
    vocab_size: int = VOCAB_SIZE_DEFAULT

    def __post_init__(self) -> None:
        """
        :raises RejectedConfigurationError:
        """
        super().__post_init__()

        for name in ("d", "d_h", "num_layers", "n_q_heads", "n_kv_heads", "vocab_size"):
            validate_positive(name, getattr(self, name))
        validate_head_dim(self.d_h)
        validate_head_counts(self.d, self.d_h, self.n_q_heads, self.n_kv_heads)
        validate_theta_base(self.theta_base)

    @property
    def group_size(self) -> int:
        """G = N_q / N_kv; 1 for MHA."""
        return self.n_q_heads // self.n_kv_heads

    @property
    def is_gqa(self) -> bool:
        return self.group_size > 1

    def kv_head_of(self, q_head: int) -> int:
        return q_head // self.group_size
