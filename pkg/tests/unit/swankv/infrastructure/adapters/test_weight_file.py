import struct

import numpy as np
import orjson
import pytest

from swankv.domain.services.toy_model import attach_projections
from swankv.infrastructure.adapters.weight_file import (
    WEIGHTS_FORMAT,
    JsonHeaderWeightStore,
)
from swankv.infrastructure.exceptions.storage import FormatError, StorageError


@pytest.fixture
def store() -> JsonHeaderWeightStore:
    return JsonHeaderWeightStore()


def split(data: bytes) -> tuple[dict, bytes]:
    (size,) = struct.unpack_from("<Q", data)
    return orjson.loads(data[8 : 8 + size]), data[8 + size :]


def join(header: dict, payload: bytes) -> bytes:
    raw = orjson.dumps(header)
    return struct.pack("<Q", len(raw)) + raw + payload


def test_save_and_load(store, sample_model, tmp_path):
    path = tmp_path / "weights.bin"

    store.save(sample_model, path)
    loaded = store.load(path)

    assert loaded == sample_model
    assert loaded.config == sample_model.config
    for name, tensor in sample_model.tensors().items():
        np.testing.assert_array_equal(loaded.tensors()[name], tensor)


def test_header_describes_tensors(store, sample_model):
    header, payload = split(store.encode(sample_model))

    assert header["format"] == WEIGHTS_FORMAT
    assert header["seed"] == 7
    assert header["config"]["n_kv_heads"] == 2
    assert sum(t["nbytes"] for t in header["tensors"]) == len(payload)
    embedding = next(t for t in header["tensors"] if t["name"] == "embedding")
    assert embedding["shape"] == [256, 32]


def test_absorbed_weights_are_kept(store, sample_model, sample_projections):
    absorbed = attach_projections(sample_model, sample_projections)

    loaded = store.decode(store.encode(absorbed))

    assert loaded.layers[1].w_o_hat is not None
    np.testing.assert_array_equal(
        loaded.layers[1].w_o_hat,
        absorbed.layers[1].w_o_hat,
    )


def with_header(store, model, **changes):
    header, payload = split(store.encode(model))
    header.update(changes)
    return join(header, payload)


def test_wrong_format(store, sample_model):
    with pytest.raises(FormatError):
        store.decode(with_header(store, sample_model, format="safetensors"))


def test_wrong_version(store, sample_model):
    with pytest.raises(FormatError):
        store.decode(with_header(store, sample_model, version=2))


def test_invalid_config(store, sample_model):
    header, payload = split(store.encode(sample_model))
    header["config"]["d_h"] = 7

    with pytest.raises(FormatError):
        store.decode(join(header, payload))


def test_tensor_outside_payload(store, sample_model):
    header, payload = split(store.encode(sample_model))

    with pytest.raises(FormatError):
        store.decode(join(header, payload[:-4]))


def test_tensor_shape_disagrees(store, sample_model):
    header, payload = split(store.encode(sample_model))
    header["tensors"][0]["shape"] = [1, 1]

    with pytest.raises(FormatError):
        store.decode(join(header, payload))


def test_missing_tensor(store, sample_model):
    header, payload = split(store.encode(sample_model))
    header["tensors"] = [t for t in header["tensors"] if t["name"] != "ln_f_gain"]

    with pytest.raises(FormatError):
        store.decode(join(header, payload))


@pytest.mark.parametrize(
    "data",
    [
        pytest.param(b"\x01", id="truncated_length"),
        pytest.param(struct.pack("<Q", 5) + b"{oops", id="not_json"),
        pytest.param(struct.pack("<Q", 2) + b"[]", id="not_an_object"),
    ],
)
def test_corrupt_header(store, data):
    with pytest.raises(FormatError):
        store.decode(data)


def test_missing_file(store, tmp_path):
    with pytest.raises(StorageError):
        store.load(tmp_path / "absent.bin")
