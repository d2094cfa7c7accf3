from dataclasses import dataclass

from swankv.domain.exceptions.base import DomainFieldError
from swankv.domain.value_objects.base import ValueObject
from swankv.domain.value_objects.model_config.model_config import ModelConfig


@dataclass(frozen=True, repr=False)
class ModelId(ValueObject):
    """A toy model is fully determined by its configuration and seed."""

    config: ModelConfig
    seed: int

    def __post_init__(self) -> None:
        super().__post_init__()

        if not 0 <= self.seed < 2**64:
            raise DomainFieldError(f"Seed must fit in u64, got {self.seed}.")
