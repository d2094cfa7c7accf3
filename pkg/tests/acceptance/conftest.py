import pytest

from swankv.application.common.ports.corpus_reader import Corpus
from swankv.application.common.services.model_provider import ModelSource
from swankv.domain.value_objects.model_config.model_config import ModelConfig
from swankv.infrastructure.adapters.corpus_bytes import ByteCorpusReader
from swankv.setup.app_factory import create_ioc_container
from swankv.setup.config.settings import AppSettings
from swankv.setup.ioc.registry import get_providers


@pytest.fixture(scope="session")
def corpus() -> Corpus:
    return ByteCorpusReader().read()


@pytest.fixture
def container():
    container = create_ioc_container(get_providers(), AppSettings())
    yield container
    container.close()


@pytest.fixture
def toy_source() -> ModelSource:
    config = ModelConfig(d=64, d_h=16, num_layers=2, n_q_heads=4, n_kv_heads=2)
    return ModelSource(config=config, seed=0)

