import logging
import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import StrEnum
from pathlib import Path
from typing import Final, TypedDict

import numpy as np
from scipy.stats import spearmanr

from swankv.application.common.ports.metrics_writer import MetricsRow, MetricsWriter
from swankv.application.common.services.model_provider import (
    ModelProvider,
    ModelSource,
)
from swankv.application.common.services.projection_provider import (
    ProjectionProvider,
    ProjectionSource,
)
from swankv.application.common.services.retention import (
    SPLIT_GRID,
    retention_to_k,
    split_params,
    symmetric_params,
)
from swankv.domain.entities.toy_model import ToyModel
from swankv.domain.enums.decode_mode import DecodeMode
from swankv.domain.enums.precision import Precision
from swankv.domain.exceptions.numerics import RejectedInputError
from swankv.domain.services.runtime import (
    decode,
    greedy_continuation,
    reference_perplexity,
)
from swankv.domain.services.sparse_cache import iso_memory_k
from swankv.domain.services.toy_model import attach_projections
from swankv.domain.value_objects.cache_params import CacheParams
from swankv.domain.value_objects.memory_model import MemoryModel

log = logging.getLogger(__name__)

DEFAULT_RETENTIONS: Final[tuple[float, ...]] = (1.0, 0.9, 0.75, 0.5, 0.3)

SWEEP_FIELDNAMES: Final[tuple[str, ...]] = (
    "kind",
    "retention",
    "k_key",
    "k_value",
    "precision",
    "buffer",
    "memory_ratio",
    "drift_max_abs",
    "drift_mean",
    "perplexity",
    "seeds",
)


class SweepKind(StrEnum):
    GRID = "grid"
    ISO_MEMORY = "iso_memory"
    SPLIT = "split"


@dataclass(frozen=True, slots=True, kw_only=True)
class SweepRequest:
    model: ModelSource
    projection: ProjectionSource
    prompt_length: int
    steps: int
    seeds: int = 5
    retentions: tuple[float, ...] = DEFAULT_RETENTIONS
    precisions: tuple[Precision, ...] = (Precision.FP16, Precision.FP8)
    buffers: tuple[int, ...] = (0,)
    split: bool = False
    iso_memory: bool = True
    threads: int = 1
    out: Path | None = None


class TrendReport(TypedDict):
    seed: int
    precision: str
    buffer: int
    spearman: float


class SweepResponse(TypedDict):
    rows: int
    seeds: list[int]
    trend: list[TrendReport]
    best_split: float | None
    split_winners: list[float]


@dataclass(frozen=True, slots=True)
class GridPoint:
    kind: SweepKind
    retention: float
    params: CacheParams


@dataclass(frozen=True, slots=True)
class Trial:
    seed: int
    model: ToyModel
    prompt: tuple[int, ...]
    text: tuple[int, ...]


@dataclass(frozen=True, slots=True)
class Outcome:
    drift_max_abs: float
    drift_mean: float
    perplexity: float | None


class SweepInteractor:
    """
    Runs every grid point (retention × precision × buffer, or the K/V split
    grid at a fixed k_key + k_value = d_h) for every seed, in SWAN mode
    against a baseline shadow. Grid points run on a thread pool. Perplexity
    scores the baseline greedy continuation of a held-out prompt against the
    baseline next-token distributions.

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

    def __call__(self, request_data: SweepRequest) -> SweepResponse:
        log.info(
            "Sweep: started. Split: %s, seeds: %d, threads: %d.",
            request_data.split,
            request_data.seeds,
            request_data.threads,
        )

        points = grid_points(request_data)
        if not points or request_data.seeds < 1:
            raise RejectedInputError("Sweep grid is empty.")
        trials = [self._trial(request_data, i) for i in range(request_data.seeds)]

        jobs = [(point, trial) for point in points for trial in trials]
        with ThreadPoolExecutor(max_workers=max(1, request_data.threads)) as pool:
            flat = list(
                pool.map(
                    lambda job: evaluate(*job, request_data.steps),
                    jobs,
                ),
            )
        outcomes = [
            flat[i * len(trials) : (i + 1) * len(trials)] for i in range(len(points))
        ]

        d_h = request_data.model.config.d_h
        rows = [
            summary_row(point, results, d_h)
            for point, results in zip(points, outcomes, strict=True)
        ]
        self._metrics_writer.write(rows, SWEEP_FIELDNAMES, request_data.out)

        seeds = [t.seed for t in trials]
        trend = trend_reports(points, outcomes, seeds)
        winners, best = split_winners(points, outcomes)
        log.info("Sweep: done. %d rows.", len(rows))
        return SweepResponse(
            rows=len(rows),
            seeds=seeds,
            trend=trend,
            best_split=best,
            split_winners=winners,
        )

    def _trial(self, request_data: SweepRequest, index: int) -> Trial:
        model = self._model_provider.obtain(request_data.model.reseeded(index))
        projections = self._projection_provider.obtain(model, request_data.projection)
        prompt = self._projection_provider.heldout(
            request_data.projection,
            request_data.prompt_length,
        )
        text = greedy_continuation(model, prompt, request_data.steps)
        log.debug("Sweep: prepared seed %d.", model.seed)
        return Trial(
            seed=model.seed,
            model=attach_projections(model, projections),
            prompt=prompt,
            text=tuple(text),
        )


def grid_points(request_data: SweepRequest) -> list[GridPoint]:
    """
    :raises RejectedInputError:
    """
    d_h = request_data.model.config.d_h
    if not request_data.precisions or not request_data.buffers:
        return []
    if request_data.split:
        precision, buffer = request_data.precisions[0], request_data.buffers[0]
        return [
            GridPoint(SweepKind.SPLIT, r, split_params(r, d_h, buffer, precision))
            for r in SPLIT_GRID
        ]

    points = [
        GridPoint(SweepKind.GRID, r, symmetric_params(r, d_h, buffer, precision))
        for precision in request_data.precisions
        for buffer in request_data.buffers
        for r in request_data.retentions
    ]
    if request_data.iso_memory and Precision.FP16 in request_data.precisions:
        for buffer in request_data.buffers:
            for r in request_data.retentions:
                k = iso_memory_k(d_h, retention_to_k(r, d_h))
                params = CacheParams(
                    k_key=k,
                    k_value=k,
                    buffer=buffer,
                    precision=Precision.FP8,
                )
                points.append(GridPoint(SweepKind.ISO_MEMORY, k / d_h, params))
    return points


def evaluate(point: GridPoint, trial: Trial, steps: int) -> Outcome:
    _, metrics = decode(
        trial.model,
        trial.prompt,
        steps,
        DecodeMode.SWAN,
        point.params,
    )
    ppl = None
    if point.kind is not SweepKind.SPLIT:
        ppl = reference_perplexity(
            trial.model,
            trial.text,
            DecodeMode.SWAN,
            point.params,
            context=min(len(trial.prompt), len(trial.text) - 1),
        )
    return Outcome(
        drift_max_abs=metrics.max_drift,
        drift_mean=metrics.mean_drift,
        perplexity=ppl,
    )


def memory_ratio(params: CacheParams, d_h: int) -> float:
    key = MemoryModel(d_h=d_h, k_active=params.k_key, precision=params.precision)
    value = MemoryModel(d_h=d_h, k_active=params.k_value, precision=params.precision)
    sparse = key.bytes_per_sparse_vector + value.bytes_per_sparse_vector
    return sparse / (2 * key.bytes_per_dense_vector)


def summary_row(point: GridPoint, results: Sequence[Outcome], d_h: int) -> MetricsRow:
    ppls = [r.perplexity for r in results if r.perplexity is not None]
    return {
        "kind": str(point.kind),
        "retention": point.retention,
        "k_key": point.params.k_key,
        "k_value": point.params.k_value,
        "precision": str(point.params.precision),
        "buffer": point.params.buffer,
        "memory_ratio": memory_ratio(point.params, d_h),
        "drift_max_abs": max(r.drift_max_abs for r in results),
        "drift_mean": float(np.mean([r.drift_mean for r in results])),
        "perplexity": float(np.mean(ppls)) if ppls else "",
        "seeds": len(results),
    }


def trend_reports(
    points: Sequence[GridPoint],
    outcomes: Sequence[Sequence[Outcome]],
    seeds: Sequence[int],
) -> list[TrendReport]:
    """
    Spearman correlation of perplexity against decreasing retention, per
    seed, precision and buffer, over the symmetric grid.
    """
    series: dict[tuple[Precision, int], list[int]] = {}
    for i, point in enumerate(points):
        if point.kind is SweepKind.GRID:
            key = (point.params.precision, point.params.buffer)
            series.setdefault(key, []).append(i)

    reports = []
    for (precision, buffer), members in series.items():
        if len({points[i].retention for i in members}) < 2:
            continue
        for s, seed in enumerate(seeds):
            compression = [-points[i].retention for i in members]
            ppl = [outcomes[i][s].perplexity for i in members]
            rho = float(spearmanr(compression, ppl).statistic)
            if math.isnan(rho):
                log.warning(
                    "Sweep: constant perplexity for seed %d (%s, b=%d).",
                    seed,
                    precision,
                    buffer,
                )
            reports.append(
                TrendReport(
                    seed=seed,
                    precision=str(precision),
                    buffer=buffer,
                    spearman=rho,
                ),
            )
    return reports


def split_winners(
    points: Sequence[GridPoint],
    outcomes: Sequence[Sequence[Outcome]],
) -> tuple[list[float], float | None]:
    """Per-seed and seed-averaged key ratio with minimal mean drift."""
    members = [i for i, p in enumerate(points) if p.kind is SweepKind.SPLIT]
    if not members:
        return [], None
    drift = np.array([[r.drift_mean for r in outcomes[i]] for i in members])
    winners = [points[members[j]].retention for j in np.argmin(drift, axis=0)]
    best = points[members[int(np.argmin(drift.mean(axis=1)))]].retention
    return winners, best
