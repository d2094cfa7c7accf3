import pytest

from swankv.setup.config.settings import AppSettings


@pytest.fixture
def small_settings() -> AppSettings:
    return AppSettings.model_validate({
        "model": {
            "D_MODEL": 16,
            "D_HEAD": 8,
            "LAYERS": 1,
            "Q_HEADS": 2,
            "KV_HEADS": 1,
            "SEED": 3,
        },
        "calibration": {"TOKENS": 64, "HELDOUT_TOKENS": 32},
        "cache": {"BUFFER": 2},
        "runtime": {"PROMPT_LENGTH": 4, "STEPS": 2, "SEEDS": 1},
        "logs": {"LEVEL": "WARNING"},
    })
