import logging
from dataclasses import dataclass
from pathlib import Path

from swankv.application.common.ports.corpus_reader import Corpus, CorpusReader
from swankv.application.common.ports.projection_store import ProjectionStore
from swankv.domain.entities.toy_model import ToyModel
from swankv.domain.enums.projection_variant import ProjectionVariant
from swankv.domain.exceptions.numerics import RejectedConfigurationError
from swankv.domain.services.calibration import (
    calibrate_batch,
    collect_activations,
    make_ablation_variant,
)
from swankv.domain.value_objects.calibration_batch import CalibrationBatch
from swankv.domain.value_objects.projection_set import ProjectionSet

log = logging.getLogger(__name__)

DEFAULT_CALIBRATION_TOKENS = 4096


@dataclass(frozen=True, slots=True, kw_only=True)
class ProjectionSource:
    path: Path | None = None
    corpus: Path | None = None
    token_count: int = DEFAULT_CALIBRATION_TOKENS
    variant: ProjectionVariant = ProjectionVariant.LEARNED
    workers: int = 1


class ProjectionProvider:
    """
    Loads a projection file or calibrates against the corpus in-process.
    The corpus stream is split into a calibration window of
    `token_count` tokens followed by held-out text.
    """

    def __init__(
        self,
        projection_store: ProjectionStore,
        corpus_reader: CorpusReader,
    ):
        self._projection_store = projection_store
        self._corpus_reader = corpus_reader

    def read_corpus(self, source: ProjectionSource) -> Corpus:
        """
        :raises StorageError:
        :raises FormatError:
        """
        return self._corpus_reader.read(source.corpus)

    def heldout(self, source: ProjectionSource, length: int) -> tuple[int, ...]:
        """
        :raises StorageError:
        :raises FormatError:
        """
        return self.read_corpus(source).window(source.token_count, length)

    def collect(
        self,
        model: ToyModel,
        source: ProjectionSource,
    ) -> tuple[CalibrationBatch, str]:
        """
        :raises RejectedInputError:
        :raises StorageError:
        :raises FormatError:
        """
        corpus = self.read_corpus(source)
        tokens = corpus.window(0, source.token_count)
        return collect_activations(model, tokens), corpus.corpus_id

    def calibrate(self, model: ToyModel, source: ProjectionSource) -> ProjectionSet:
        """
        :raises RejectedInputError:
        :raises StorageError:
        :raises FormatError:
        """
        batch, corpus_id = self.collect(model, source)
        learned = calibrate_batch(batch, corpus_id, model.seed, source.workers)
        return make_ablation_variant(learned, source.variant, model.seed)

    def obtain(self, model: ToyModel, source: ProjectionSource) -> ProjectionSet:
        """
        :raises RejectedConfigurationError:
        :raises RejectedInputError:
        :raises StorageError:
        :raises FormatError:
        """
        if source.path is None:
            log.info(
                "No projection file given, calibrating in-process on %d tokens.",
                source.token_count,
            )
            return self.calibrate(model, source)

        projections = self._projection_store.load(source.path)
        if not projections.matches(model.config):
            raise RejectedConfigurationError(
                f"Projection file {source.path} was calibrated for "
                f"{projections.config!r}, model is {model.config!r}.",
            )
        if projections.metadata.seed != model.seed:
            log.warning(
                "Projection file %s was calibrated with seed %d, model seed is %d.",
                source.path,
                projections.metadata.seed,
                model.seed,
            )
        if (
            source.variant is not ProjectionVariant.LEARNED
            and projections.variant is ProjectionVariant.LEARNED
        ):
            return make_ablation_variant(projections, source.variant, model.seed)
        return projections
