from dataclasses import dataclass

from swankv.domain.value_objects.base import ValueObject


@dataclass(frozen=True, repr=False, kw_only=True)
class BreakEven(ValueObject):
    """
    Smallest sequence length at which SWAN attention is strictly cheaper
    than standard attention. `length` is None when no such length exists.
    """

    d_h: int
    k_active: int
    buffer: int
    length: int | None

    @property
    def never(self) -> bool:
        return self.length is None

    def describe(self) -> str:
        return "never" if self.length is None else str(self.length)


@dataclass(frozen=True, repr=False, kw_only=True)
class CrossoverReport(ValueObject):
    """
    Outcome of an instrumented sweep over L = 1..max_length:
    `measured_length` is the first L whose measured SWAN count is strictly
    below the standard one, None if not reached.
    """

    modeled: BreakEven
    measured_length: int | None
    max_length: int
    tolerance: int

    @property
    def reached(self) -> bool:
        return self.measured_length is not None

    @property
    def agrees(self) -> bool:
        if self.modeled.length is None or self.measured_length is None:
            return self.modeled.length is None and self.measured_length is None
        return abs(self.measured_length - self.modeled.length) <= self.tolerance
