import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Final, TypedDict

from swankv.application.common.ports.metrics_writer import MetricsRow, MetricsWriter
from swankv.application.common.services.model_provider import (
    ModelProvider,
    ModelSource,
)
from swankv.application.common.services.projection_provider import (
    ProjectionProvider,
    ProjectionSource,
)
from swankv.domain.enums.decode_mode import DecodeMode
from swankv.domain.services.runtime import decode, greedy_continuation, perplexity
from swankv.domain.value_objects.cache_params import CacheParams
from swankv.domain.value_objects.run_metrics import RunMetrics

log = logging.getLogger(__name__)

RUN_FIELDNAMES: Final[tuple[str, ...]] = (
    "L",
    "token",
    "modeled_standard",
    "modeled_swan",
    "measured_standard",
    "measured_swan",
    "bytes_cache",
    "drift_max_abs",
    "drift_l2",
)


@dataclass(frozen=True, slots=True, kw_only=True)
class RunDecodeRequest:
    model: ModelSource
    projection: ProjectionSource
    mode: DecodeMode
    params: CacheParams
    prompt_length: int
    steps: int
    out: Path | None = None
    with_perplexity: bool = False


class RunDecodeResponse(TypedDict):
    mode: str
    prompt: list[int]
    generated: list[int]
    max_drift: float
    mean_drift: float
    final_cache_bytes: int
    perplexity: float | None


class RunDecodeInteractor:
    """
    Greedy decode of a corpus prompt in baseline or SWAN mode. Writes one
    CSV row per token stepped through the cache.

    :raises RejectedConfigurationError:
    :raises RejectedInputError:
    :raises StorageError:
    :raises FormatError:
    """

    def __init__(
        self,
        model_provider: ModelProvider,
        projection_provider: ProjectionProvider,
        metrics_writer: MetricsWriter,
    ):
        self._model_provider = model_provider
        self._projection_provider = projection_provider
        self._metrics_writer = metrics_writer

    def __call__(self, request_data: RunDecodeRequest) -> RunDecodeResponse:
        log.info(
            "Run decode: started. Mode: '%s', params: %r.",
            request_data.mode,
            request_data.params,
        )

        model = self._model_provider.obtain(request_data.model)
        projections = None
        if request_data.mode is DecodeMode.SWAN:
            projections = self._projection_provider.obtain(
                model,
                request_data.projection,
            )
        prompt = self._projection_provider.heldout(
            request_data.projection,
            request_data.prompt_length,
        )

        generated, metrics = decode(
            model,
            prompt,
            request_data.steps,
            request_data.mode,
            request_data.params,
            projections,
        )
        ppl = None
        if request_data.with_perplexity:
            text = greedy_continuation(model, prompt, request_data.steps)
            ppl = perplexity(
                model,
                text,
                request_data.mode,
                request_data.params,
                projections,
            )
            log.info("Run decode: perplexity %.4f.", ppl)

        self._metrics_writer.write(
            metric_rows(metrics),
            RUN_FIELDNAMES,
            request_data.out,
        )

        log.info("Run decode: done. Generated %d tokens.", len(generated))
        return RunDecodeResponse(
            mode=str(request_data.mode),
            prompt=list(prompt),
            generated=list(generated),
            max_drift=metrics.max_drift,
            mean_drift=metrics.mean_drift,
            final_cache_bytes=metrics.cache_bytes[-1],
            perplexity=ppl,
        )


def metric_rows(metrics: RunMetrics) -> list[MetricsRow]:
    return [
        {
            "L": step.length,
            "token": step.token,
            "modeled_standard": step.flops.modeled_standard,
            "modeled_swan": step.flops.modeled_swan,
            "measured_standard": step.flops.measured_standard,
            "measured_swan": step.flops.measured_swan,
            "bytes_cache": step.cache_bytes,
            "drift_max_abs": step.drift_max_abs,
            "drift_l2": step.drift_l2,
        }
        for step in metrics.steps
    ]
