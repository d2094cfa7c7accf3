import logging
from dataclasses import dataclass, replace
from pathlib import Path

from swankv.application.common.ports.weight_store import WeightStore
from swankv.domain.entities.toy_model import ToyModel
from swankv.domain.exceptions.numerics import RejectedConfigurationError
from swankv.domain.services.toy_model import build_toy_model
from swankv.domain.value_objects.model_config.model_config import ModelConfig

log = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True, kw_only=True)
class ModelSource:
    config: ModelConfig
    seed: int
    weights: Path | None = None

    def reseeded(self, offset: int) -> "ModelSource":
        return replace(self, seed=self.seed + offset)


class ModelProvider:
    """
    Loads a toy model from a weight file when one is given, otherwise builds
    it from (config, seed).
    """

    def __init__(self, weight_store: WeightStore):
        self._weight_store = weight_store

    def obtain(self, source: ModelSource) -> ToyModel:
        """
        :raises RejectedConfigurationError:
        :raises StorageError:
        :raises FormatError:
        """
        if source.weights is None:
            log.debug("Building toy model: seed %d, %r.", source.seed, source.config)
            return build_toy_model(source.config, source.seed)

        model = self._weight_store.load(source.weights)
        if model.config != source.config:
            raise RejectedConfigurationError(
                f"Weight file {source.weights} holds {model.config!r}, "
                f"expected {source.config!r}.",
            )
        if model.seed != source.seed:
            log.warning(
                "Weight file %s was built with seed %d, requested seed %d.",
                source.weights,
                model.seed,
                source.seed,
            )
        return model
