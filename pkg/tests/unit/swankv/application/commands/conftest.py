from unittest.mock import create_autospec

import pytest

from swankv.application.common.ports.corpus_reader import Corpus, CorpusReader
from swankv.application.common.ports.metrics_writer import MetricsWriter
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
from swankv.domain.value_objects.model_config.model_config import ModelConfig


@pytest.fixture
def weight_store():
    return create_autospec(WeightStore)


@pytest.fixture
def projection_store():
    return create_autospec(ProjectionStore)


@pytest.fixture
def metrics_writer():
    return create_autospec(MetricsWriter)


@pytest.fixture
def model_provider(weight_store) -> ModelProvider:
    return ModelProvider(weight_store)


@pytest.fixture
def projection_provider(projection_store, sample_corpus: Corpus) -> ProjectionProvider:
    reader = create_autospec(CorpusReader)
    reader.read.return_value = sample_corpus
    return ProjectionProvider(projection_store, reader)


@pytest.fixture
def model_source(gqa_config: ModelConfig) -> ModelSource:
    return ModelSource(config=gqa_config, seed=7)


@pytest.fixture
def projection_source() -> ProjectionSource:
    return ProjectionSource(token_count=64)
