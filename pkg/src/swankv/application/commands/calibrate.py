import logging
from dataclasses import dataclass
from pathlib import Path
from typing import TypedDict

import numpy as np

from swankv.application.common.ports.projection_store import ProjectionStore
from swankv.application.common.ports.weight_store import WeightStore
from swankv.application.common.services.model_provider import (
    ModelProvider,
    ModelSource,
)
from swankv.application.common.services.projection_provider import (
    ProjectionProvider,
    ProjectionSource,
)
from swankv.domain.services.calibration import (
    calibrate_batch,
    make_ablation_variant,
    topk_energy_fraction,
)
from swankv.domain.services.tensor import orthogonality_residual
from swankv.domain.value_objects.calibration_batch import CalibrationBatch
from swankv.domain.value_objects.projection_set import ProjectionSet

log = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True, kw_only=True)
class CalibrateRequest:
    model: ModelSource
    projection: ProjectionSource
    out: Path
    weights_out: Path | None = None


class LayerReport(TypedDict):
    layer: int
    residual_qk: float
    residual_vo: float
    energy: dict[int, float]


class CalibrateResponse(TypedDict):
    path: str
    variant: str
    corpus_id: str
    token_count: int
    layers: list[LayerReport]


class CalibrateInteractor:
    """
    Derives P_QK / P_VO for every (layer, KV-head) of the toy model from the
    calibration window of the corpus, applies the requested variant, writes
    the projection file and reports per-layer orthogonality residuals and
    top-k key energy at k in {d_h/4, d_h/2, 3·d_h/4}.

    :raises RejectedConfigurationError:
    :raises RejectedInputError:
    :raises StorageError:
    :raises FormatError:
    """

    def __init__(
        self,
        model_provider: ModelProvider,
        projection_provider: ProjectionProvider,
        projection_store: ProjectionStore,
        weight_store: WeightStore,
    ):
        self._model_provider = model_provider
        self._projection_provider = projection_provider
        self._projection_store = projection_store
        self._weight_store = weight_store

    def __call__(self, request_data: CalibrateRequest) -> CalibrateResponse:
        source = request_data.projection
        log.info(
            "Calibrate: started. Variant: '%s', tokens: %d.",
            source.variant,
            source.token_count,
        )

        model = self._model_provider.obtain(request_data.model)
        batch, corpus_id = self._projection_provider.collect(model, source)
        learned = calibrate_batch(batch, corpus_id, model.seed, source.workers)
        projections = make_ablation_variant(learned, source.variant, model.seed)

        self._projection_store.save(projections, request_data.out)
        if request_data.weights_out is not None:
            self._weight_store.save(model, request_data.weights_out)
            log.info("Calibrate: weights written to '%s'.", request_data.weights_out)

        layers = layer_reports(projections, batch)
        log.info("Calibrate: done. Projection file: '%s'.", request_data.out)
        return CalibrateResponse(
            path=str(request_data.out),
            variant=str(projections.variant),
            corpus_id=corpus_id,
            token_count=batch.token_count,
            layers=layers,
        )


def layer_reports(
    projections: ProjectionSet,
    batch: CalibrationBatch,
) -> list[LayerReport]:
    cfg = projections.config
    ks = sorted({cfg.d_h // 4, cfg.d_h // 2, 3 * cfg.d_h // 4})
    reports = []
    for i in range(cfg.num_layers):
        heads = range(cfg.n_kv_heads)
        energy = {
            k: float(
                np.mean([
                    topk_energy_fraction(batch.k[i, h], projections.qk(i, h), k)
                    for h in heads
                ]),
            )
            for k in ks
        }
        residual_qk = max(orthogonality_residual(projections.qk(i, h)) for h in heads)
        residual_vo = max(orthogonality_residual(projections.vo(i, h)) for h in heads)
        reports.append(
            LayerReport(
                layer=i,
                residual_qk=residual_qk,
                residual_vo=residual_vo,
                energy=energy,
            ),
        )
        log.debug("Calibrate: layer %d energy %s.", i, energy)
    return reports
