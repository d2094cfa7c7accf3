from dataclasses import dataclass

from swankv.domain.exceptions.base import DomainFieldError
from swankv.domain.value_objects.base import ValueObject


@dataclass(frozen=True, repr=False, kw_only=True)
class StepFlops(ValueObject):
    """
    Operation counts of one attention step. One multiply-add is 2 FLOPs.
    `softmax` is the lower-order exp/normalize term kept apart from `matvec`.
    """

    projection: int
    matvec: int
    softmax: int

    def __post_init__(self) -> None:
        super().__post_init__()

        if min(self.projection, self.matvec, self.softmax) < 0:
            raise DomainFieldError("FLOP counts must be >= 0.")

    @property
    def total(self) -> int:
        """Projection plus score/aggregation work; softmax excluded."""
        return self.projection + self.matvec


@dataclass(frozen=True, repr=False, kw_only=True)
class FlopsReport(ValueObject):
    """raises DomainFieldError"""

    length: int
    d_h: int
    k_active: int
    buffer: int
    modeled_standard: int
    modeled_swan: int
    measured_standard: int
    measured_swan: int

    def __post_init__(self) -> None:
        """
        :raises DomainFieldError:
        """
        super().__post_init__()

        counts = (
            self.modeled_standard,
            self.modeled_swan,
            self.measured_standard,
            self.measured_swan,
        )
        if min(counts) < 0:
            raise DomainFieldError("FLOP counts must be >= 0.")
        if min(self.length, self.d_h, self.k_active, self.buffer) < 0:
            raise DomainFieldError("Report parameters must be >= 0.")
