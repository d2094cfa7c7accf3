import logging
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Final, TypedDict

import numpy as np

from swankv.application.common.exceptions.acceptance import AcceptanceCheckError
from swankv.application.common.ports.metrics_writer import MetricsRow, MetricsWriter
from swankv.application.common.services.model_provider import (
    ModelProvider,
    ModelSource,
)
from swankv.application.common.services.projection_provider import (
    ProjectionProvider,
    ProjectionSource,
)
from swankv.application.common.services.retention import retention_to_k
from swankv.domain.enums.projection_variant import ProjectionVariant
from swankv.domain.services.calibration import (
    collect_activations,
    make_ablation_variant,
    pruned_reconstruction_error,
)
from swankv.domain.value_objects.calibration_batch import CalibrationBatch
from swankv.domain.value_objects.projection_set import ProjectionSet

log = logging.getLogger(__name__)

ABLATION_VARIANTS: Final[tuple[ProjectionVariant, ...]] = (
    ProjectionVariant.LEARNED,
    ProjectionVariant.HEAD_SHUFFLE,
    ProjectionVariant.LAYER_SHUFFLE,
    ProjectionVariant.KV_SHUFFLE,
    ProjectionVariant.RANDOM,
    ProjectionVariant.IDENTITY,
)
ABLATE_FIELDNAMES: Final[tuple[str, ...]] = (
    "seed",
    "variant",
    "error_key",
    "error_value",
    "error_mean",
)
DEFAULT_HELDOUT_TOKENS: Final[int] = 512


@dataclass(frozen=True, slots=True, kw_only=True)
class AblateRequest:
    model: ModelSource
    projection: ProjectionSource
    seeds: int = 5
    retention: float = 0.5
    heldout_tokens: int = DEFAULT_HELDOUT_TOKENS
    check: bool = False
    out: Path | None = None


class VariantReport(TypedDict):
    variant: str
    error_mean: float
    best_in_seeds: int
    worst_in_seeds: int


class AblateResponse(TypedDict):
    k: int
    seeds: list[int]
    variants: list[VariantReport]


@dataclass(frozen=True, slots=True)
class VariantError:
    seed: int
    variant: ProjectionVariant
    key: float
    value: float

    @property
    def mean(self) -> float:
        return (self.key + self.value) / 2


class AblateInteractor:
    """
    Compares projection variants by the mean relative reconstruction error
    of pruned rotated K/V on held-out activations. The identity variant is
    a control equal to magnitude pruning without rotation. With `check`,
    the learned bases must beat every other rotation in every seed.

    :raises RejectedConfigurationError:
    :raises RejectedInputError:
    :raises AcceptanceCheckError:
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

    def __call__(self, request_data: AblateRequest) -> AblateResponse:
        log.info(
            "Ablate: started. Retention: %.2f, seeds: %d.",
            request_data.retention,
            request_data.seeds,
        )

        d_h = request_data.model.config.d_h
        k = retention_to_k(request_data.retention, d_h)
        heldout = self._projection_provider.heldout(
            request_data.projection,
            request_data.heldout_tokens,
        )

        errors: list[VariantError] = []
        seeds: list[int] = []
        for i in range(request_data.seeds):
            model = self._model_provider.obtain(request_data.model.reseeded(i))
            learned = self._projection_provider.obtain(model, request_data.projection)
            batch = collect_activations(model, heldout)
            seeds.append(model.seed)
            for variant in ABLATION_VARIANTS:
                projections = make_ablation_variant(learned, variant, model.seed)
                errors.append(variant_error(projections, batch, k, model.seed))
            log.debug("Ablate: seed %d evaluated.", model.seed)

        self._metrics_writer.write(
            [error_row(e) for e in errors],
            ABLATE_FIELDNAMES,
            request_data.out,
        )
        reports = variant_reports(errors, seeds)
        if request_data.check:
            check_learned_best(reports, len(seeds))

        log.info("Ablate: done. %d variants over %d seeds.", len(reports), len(seeds))
        return AblateResponse(k=k, seeds=seeds, variants=reports)


def variant_error(
    projections: ProjectionSet,
    batch: CalibrationBatch,
    k: int,
    seed: int,
) -> VariantError:
    cfg = projections.config
    slots = [(i, h) for i in range(cfg.num_layers) for h in range(cfg.n_kv_heads)]
    key = np.mean([
        pruned_reconstruction_error(batch.k[i, h], projections.qk(i, h), k)
        for i, h in slots
    ])
    value = np.mean([
        pruned_reconstruction_error(batch.v[i, h], projections.vo(i, h), k)
        for i, h in slots
    ])
    return VariantError(
        seed=seed,
        variant=projections.variant,
        key=float(key),
        value=float(value),
    )


def error_row(error: VariantError) -> MetricsRow:
    return {
        "seed": error.seed,
        "variant": str(error.variant),
        "error_key": error.key,
        "error_value": error.value,
        "error_mean": error.mean,
    }


def variant_reports(
    errors: Sequence[VariantError],
    seeds: Sequence[int],
) -> list[VariantReport]:
    """
    Seed-averaged error per variant, and in how many seeds it was strictly
    best / worst among the rotations (identity control excluded).
    """
    best = dict.fromkeys(ABLATION_VARIANTS, 0)
    worst = dict.fromkeys(ABLATION_VARIANTS, 0)
    rotations = [e for e in errors if e.variant is not ProjectionVariant.IDENTITY]
    for seed in seeds:
        ranked = sorted((e for e in rotations if e.seed == seed), key=lambda e: e.mean)
        if len(ranked) < 2:
            continue
        if ranked[0].mean < ranked[1].mean:
            best[ranked[0].variant] += 1
        if ranked[-1].mean > ranked[-2].mean:
            worst[ranked[-1].variant] += 1

    return [
        VariantReport(
            variant=str(variant),
            error_mean=float(np.mean([e.mean for e in errors if e.variant is variant])),
            best_in_seeds=best[variant],
            worst_in_seeds=worst[variant],
        )
        for variant in ABLATION_VARIANTS
    ]


def check_learned_best(reports: Sequence[VariantReport], seed_count: int) -> None:
    """
    :raises AcceptanceCheckError:
    """
    learned = next(r for r in reports if r["variant"] == ProjectionVariant.LEARNED)
    if learned["best_in_seeds"] != seed_count:
        raise AcceptanceCheckError(
            f"Learned projections were strictly best in {learned['best_in_seeds']} "
            f"of {seed_count} seeds.",
        )
