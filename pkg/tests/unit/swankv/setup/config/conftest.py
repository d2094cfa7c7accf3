import copy

import pytest


@pytest.fixture
def model_settings_config_dict_valid():
    return {
        "D_MODEL": 32,
        "D_HEAD": 8,
        "LAYERS": 2,
        "Q_HEADS": 4,
        "KV_HEADS": 2,
        "THETA_BASE": 10000.0,
        "VOCAB_SIZE": 256,
        "SEED": 11,
    }


@pytest.fixture
def calibration_settings_config_dict_valid():
    return {
        "TOKENS": 1024,
        "HELDOUT_TOKENS": 128,
        "CORPUS": None,
        "VARIANT": "learned",
    }


@pytest.fixture
def cache_settings_config_dict_valid():
    return {
        "K_RATIO": 0.5,
        "BUFFER": 8,
        "PRECISION": "fp8",
    }


@pytest.fixture
def runtime_settings_config_dict_valid():
    return {
        "PROMPT_LENGTH": 16,
        "STEPS": 8,
        "SEEDS": 3,
        "RETENTIONS": (1.0, 0.5),
        "BUFFERS": (0, 8),
    }


@pytest.fixture
def parallelism_settings_config_dict_valid():
    return {
        "THREADS": 2,
    }


@pytest.fixture
def logging_settings_config_dict_valid():
    return {
        "LEVEL": "CRITICAL",
    }


@pytest.fixture
def app_settings_config_dict_valid(
    model_settings_config_dict_valid,
    calibration_settings_config_dict_valid,
    cache_settings_config_dict_valid,
    runtime_settings_config_dict_valid,
    parallelism_settings_config_dict_valid,
    logging_settings_config_dict_valid,
):
    return {
        "model": model_settings_config_dict_valid,
        "calibration": calibration_settings_config_dict_valid,
        "cache": cache_settings_config_dict_valid,
        "runtime": runtime_settings_config_dict_valid,
        "parallelism": parallelism_settings_config_dict_valid,
        "logs": logging_settings_config_dict_valid,
    }


@pytest.fixture
def app_settings_config_dict_invalid(app_settings_config_dict_valid):
    config = copy.deepcopy(app_settings_config_dict_valid)
    config["cache"]["K_RATIO"] = "half"
    return config
