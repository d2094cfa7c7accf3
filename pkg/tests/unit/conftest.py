import numpy as np
import pytest

from swankv.application.common.ports.corpus_reader import Corpus
from swankv.domain.entities.toy_model import ToyModel
from swankv.domain.services.calibration import calibrate
from swankv.domain.services.toy_model import build_toy_model
from swankv.domain.value_objects.model_config.model_config import ModelConfig
from swankv.domain.value_objects.projection_set import ProjectionSet


@pytest.fixture
def mha_config() -> ModelConfig:
    return ModelConfig(d=32, d_h=8, num_layers=2, n_q_heads=4, n_kv_heads=4)


@pytest.fixture
def gqa_config() -> ModelConfig:
    return ModelConfig(d=32, d_h=8, num_layers=2, n_q_heads=4, n_kv_heads=2)


@pytest.fixture
def sample_model(gqa_config: ModelConfig) -> ToyModel:
    return build_toy_model(gqa_config, seed=7)


@pytest.fixture
def sample_corpus() -> Corpus:
    rng = np.random.default_rng(11)
    tokens = tuple(int(t) for t in rng.integers(32, 127, size=600))
    return Corpus(tokens=tokens, corpus_id="sample.txt:0123456789ab")


@pytest.fixture
def sample_projections(sample_model: ToyModel, sample_corpus: Corpus) -> ProjectionSet:
    return calibrate(
        sample_model,
        sample_corpus.window(0, 256),
        sample_corpus.corpus_id,
        seed=sample_model.seed,
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(2024)
