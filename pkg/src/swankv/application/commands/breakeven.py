import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Final, TypedDict

from swankv.application.common.exceptions.acceptance import AcceptanceCheckError
from swankv.application.common.ports.metrics_writer import MetricsRow, MetricsWriter
from swankv.domain.services.crossover import (
    CROSSOVER_TOLERANCE,
    crossover_validate,
    default_max_length,
    instrumented_steps,
    retained_components,
)
from swankv.domain.services.flops import (
    break_even_length,
    flops_standard,
    flops_swan,
)

log = logging.getLogger(__name__)

BREAKEVEN_FIELDNAMES: Final[tuple[str, ...]] = (
    "L",
    "mode",
    "modeled_flops",
    "measured_flops",
    "bytes_cache",
)


@dataclass(frozen=True, slots=True, kw_only=True)
class BreakevenRequest:
    d_h: int
    k: int
    buffer: int
    validate: bool = False
    max_length: int | None = None
    seed: int = 0
    out: Path | None = None


class BreakevenResponse(TypedDict):
    d_h: int
    k: int
    buffer: int
    modeled: str
    measured: str | None
    agrees: bool | None


class BreakevenInteractor:
    """
    Modeled break-even length, optionally cross-checked against an
    instrumented single-head run. With `out`, per-L FLOPs and cache bytes
    of both modes are written in long format.

    :raises RejectedInputError:
    :raises AcceptanceCheckError:
    :raises StorageError:
    """

    def __init__(self, metrics_writer: MetricsWriter):
        self._metrics_writer = metrics_writer

    def __call__(self, request_data: BreakevenRequest) -> BreakevenResponse:
        d_h, k, b = request_data.d_h, request_data.k, request_data.buffer
        log.info("Break-even: started. d_h=%d k=%d b=%d.", d_h, k, b)

        modeled = break_even_length(d_h, k, b)
        limit = request_data.max_length or default_max_length(d_h, k, b)

        if request_data.out is not None:
            rows = crossover_rows(d_h, k, b, limit, request_data.seed)
            self._metrics_writer.write(rows, BREAKEVEN_FIELDNAMES, request_data.out)

        measured = agrees = None
        if request_data.validate:
            report = crossover_validate(d_h, k, b, limit, request_data.seed)
            measured = (
                "not reached"
                if report.measured_length is None
                else str(report.measured_length)
            )
            agrees = report.agrees
            if not agrees:
                raise AcceptanceCheckError(
                    f"Measured crossover {measured} is not within "
                    f"±{CROSSOVER_TOLERANCE} of modeled {modeled.describe()} "
                    f"(d_h={d_h}, k={k}, b={b}, L<={limit}).",
                )

        log.info("Break-even: done. Modeled: %s.", modeled.describe())
        return BreakevenResponse(
            d_h=d_h,
            k=k,
            buffer=b,
            modeled=modeled.describe(),
            measured=measured,
            agrees=agrees,
        )


def crossover_rows(
    d_h: int,
    k: int,
    buffer: int,
    max_length: int,
    seed: int,
) -> list[MetricsRow]:
    retained = retained_components(d_h, k)
    rows: list[MetricsRow] = []
    for step in instrumented_steps(d_h, k, buffer, max_length, seed):
        rows.append({
            "L": step.length,
            "mode": "standard",
            "modeled_flops": flops_standard(step.length, d_h),
            "measured_flops": step.standard_flops,
            "bytes_cache": step.standard_bytes,
        })
        rows.append({
            "L": step.length,
            "mode": "swan",
            "modeled_flops": flops_swan(step.length, d_h, retained, buffer),
            "measured_flops": step.swan_flops,
            "bytes_cache": step.swan_bytes,
        })
    return rows
