from dataclasses import dataclass

from swankv.domain.exceptions.base import DomainFieldError
from swankv.domain.value_objects.base import ValueObject
from swankv.domain.value_objects.flops_report import FlopsReport


@dataclass(frozen=True, repr=False, kw_only=True)
class StepMetrics(ValueObject):
    """
    Measurements after one decode step. `length` is the cache length L the
    step attended over; drift compares logits against a baseline shadow run.
    """

    length: int
    token: int
    flops: FlopsReport
    cache_bytes: int
    drift_max_abs: float
    drift_l2: float


@dataclass(frozen=True, repr=False, kw_only=True)
class RunMetrics(ValueObject):
    """raises DomainFieldError"""

    steps: tuple[StepMetrics, ...]
    prompt_length: int
    tokens_generated: int
    perplexity: float | None = None

    def __post_init__(self) -> None:
        """
        :raises DomainFieldError:
        """
        super().__post_init__()

        if len(self.steps) != self.prompt_length + self.tokens_generated:
            raise DomainFieldError(
                f"Recorded {len(self.steps)} steps for "
                f"{self.prompt_length} prompt + {self.tokens_generated} "
                "generated tokens.",
            )

    @property
    def max_drift(self) -> float:
        return max((s.drift_max_abs for s in self.steps), default=0.0)

    @property
    def mean_drift(self) -> float:
        if not self.steps:
            return 0.0
        return sum(s.drift_l2 for s in self.steps) / len(self.steps)

    @property
    def cache_bytes(self) -> tuple[int, ...]:
        return tuple(s.cache_bytes for s in self.steps)
