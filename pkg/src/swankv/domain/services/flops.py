"""
Analytical per-head decode-step cost model and the counter the kernels
report into. Convention: one multiply-add is 2 FLOPs; softmax work is
tracked apart as the lower-order O(L) term.
"""

from dataclasses import dataclass

from swankv.domain.exceptions.numerics import RejectedInputError
from swankv.domain.value_objects.break_even import BreakEven
from swankv.domain.value_objects.flops_report import StepFlops

# exp, max-subtraction, sum, division and scaling per score
SOFTMAX_FLOPS_PER_SCORE = 5


def _check_dims(length: int, d_h: int) -> None:
    if length < 1:
        raise RejectedInputError(f"Sequence length must be >= 1, got {length}.")
    if d_h < 1:
        raise RejectedInputError(f"Head dimension must be >= 1, got {d_h}.")


def flops_standard(length: int, d_h: int) -> int:
    """
    Scores plus aggregation over L dense tokens: 4·L·d_h.

    :raises RejectedInputError:
    """
    _check_dims(length, d_h)
    return 4 * length * d_h


def flops_swan(length: int, d_h: int, k: int, buffer: int) -> int:
    """
    4·d_h² for projecting q and k, 4·k per sparse token, 4·d_h per buffered
    token. While L <= b every token is buffered.

    :raises RejectedInputError:
    """
    _check_dims(length, d_h)
    if not 0 <= k <= d_h:
        raise RejectedInputError(f"k must lie in [0, {d_h}], got {k}.")
    if buffer < 0:
        raise RejectedInputError(f"Buffer must be >= 0, got {buffer}.")
    sparse = max(length - buffer, 0)
    dense = min(length, buffer)
    return 4 * d_h * d_h + 4 * sparse * k + 4 * dense * d_h


def flops_swan_group(
    length: int,
    d_h: int,
    k_key: int,
    k_value: int,
    buffer: int,
    group_size: int = 1,
) -> int:
    """
    `flops_swan` for one KV-head serving `group_size` queries with separate
    key/value retention. Equals `flops_swan` for G = 1 and k_key == k_value.
    """
    _check_dims(length, d_h)
    sparse = max(length - buffer, 0)
    dense = min(length, buffer)
    projection = 2 * d_h * d_h * (group_size + 1)
    per_query = 2 * sparse * (k_key + k_value) + 4 * dense * d_h
    return projection + group_size * per_query


def break_even_length(d_h: int, k: int, buffer: int) -> BreakEven:
    """
    Smallest integer L with L > d_h²/(d_h − k) + b, or "never" if k >= d_h.

    :raises RejectedInputError:
    """
    if d_h < 1 or k < 0 or buffer < 0:
        raise RejectedInputError("d_h must be >= 1, k and b must be >= 0.")
    if k >= d_h:
        return BreakEven(d_h=d_h, k_active=k, buffer=buffer, length=None)
    return BreakEven(
        d_h=d_h,
        k_active=k,
        buffer=buffer,
        length=(d_h * d_h) // (d_h - k) + buffer + 1,
    )


@dataclass(slots=True)
class FlopsCounter:
    """
    Mutable per-run tally. Owned by one decode loop; not shared across
    threads.
    """

    projection: int = 0
    matvec: int = 0
    softmax: int = 0

    def record(self, step: StepFlops) -> None:
        self.projection += step.projection
        self.matvec += step.matvec
        self.softmax += step.softmax

    @property
    def total(self) -> int:
        return self.projection + self.matvec

    def snapshot(self) -> StepFlops:
        return StepFlops(
            projection=self.projection,
            matvec=self.matvec,
            softmax=self.softmax,
        )

    def reset(self) -> None:
        self.projection = self.matvec = self.softmax = 0
