"""
Model weight container:

    header_len  u64 little-endian
    header      JSON (orjson), `header_len` bytes:
                {"format", "version", "config", "seed",
                 "tensors": [{"name", "shape", "offset", "nbytes"}, ...]}
    payload     tensors as raw little-endian f32, at `offset` from the
                start of the payload, in header order
"""

import logging
import re
import struct
from dataclasses import fields
from pathlib import Path
from typing import Any, Final

import numpy as np
import orjson

from swankv.domain.entities.toy_model import LayerWeights, ToyModel, Weights
from swankv.domain.exceptions.base import DomainError
from swankv.domain.value_objects.model_config.model_config import ModelConfig
from swankv.domain.value_objects.model_id import ModelId
from swankv.infrastructure.exceptions.storage import FormatError, StorageError

log = logging.getLogger(__name__)

WEIGHTS_FORMAT: Final[str] = "swankv-weights"
WEIGHTS_VERSION: Final[int] = 1

_HEADER_LEN = struct.Struct("<Q")
_TENSOR_DTYPE: Final[np.dtype[np.float32]] = np.dtype("<f4")
_LAYER_TENSOR = re.compile(r"layers\.(\d+)\.(\w+)")
_CONFIG_FIELDS: Final[tuple[str, ...]] = tuple(f.name for f in fields(ModelConfig))


class JsonHeaderWeightStore:
    def encode(self, model: ToyModel) -> bytes:
        cfg = model.config
        entries = []
        chunks = []
        offset = 0
        for name, tensor in model.tensors().items():
            raw = np.ascontiguousarray(tensor, dtype=_TENSOR_DTYPE).tobytes()
            entries.append({
                "name": name,
                "shape": list(tensor.shape),
                "offset": offset,
                "nbytes": len(raw),
            })
            chunks.append(raw)
            offset += len(raw)
        header = orjson.dumps({
            "format": WEIGHTS_FORMAT,
            "version": WEIGHTS_VERSION,
            "config": {name: getattr(cfg, name) for name in _CONFIG_FIELDS},
            "seed": model.seed,
            "tensors": entries,
        })
        return b"".join((_HEADER_LEN.pack(len(header)), header, *chunks))

    def decode(self, data: bytes) -> ToyModel:
        """
        :raises FormatError:
        """
        try:
            (header_len,) = _HEADER_LEN.unpack_from(data, 0)
            start = _HEADER_LEN.size + header_len
            header = orjson.loads(data[_HEADER_LEN.size : start])
        except (struct.error, orjson.JSONDecodeError) as err:
            raise FormatError(f"Corrupt weight file header: {err}") from err
        if not isinstance(header, dict) or header.get("format") != WEIGHTS_FORMAT:
            raise FormatError("Not a swankv weight file.")
        if header.get("version") != WEIGHTS_VERSION:
            version = header.get("version")
            raise FormatError(f"Unsupported weight file version {version}.")

        try:
            tensors = _read_tensors(header["tensors"], memoryview(data)[start:])
            config = ModelConfig(**header["config"])
            return _assemble(ModelId(config=config, seed=header["seed"]), tensors)
        except (KeyError, TypeError, ValueError, DomainError) as err:
            raise FormatError(f"Invalid weight file contents: {err}") from err

    def save(self, model: ToyModel, path: Path) -> None:
        """
        :raises StorageError:
        """
        try:
            path.write_bytes(self.encode(model))
        except OSError as err:
            raise StorageError(f"Cannot write weight file {path}: {err}") from err
        log.debug("Weight file written: '%s'.", path)

    def load(self, path: Path) -> ToyModel:
        """
        :raises StorageError:
        :raises FormatError:
        """
        try:
            data = path.read_bytes()
        except OSError as err:
            raise StorageError(f"Cannot read weight file {path}: {err}") from err
        return self.decode(data)


def _read_tensors(
    entries: list[dict[str, Any]],
    payload: memoryview,
) -> dict[str, Weights]:
    """
    :raises FormatError:
    """
    tensors = {}
    for entry in entries:
        shape = tuple(int(n) for n in entry["shape"])
        offset, nbytes = int(entry["offset"]), int(entry["nbytes"])
        if nbytes != int(np.prod(shape)) * _TENSOR_DTYPE.itemsize:
            raise FormatError(f"Tensor {entry['name']!r} size disagrees with shape.")
        if offset < 0 or offset + nbytes > len(payload):
            raise FormatError(f"Tensor {entry['name']!r} lies outside the payload.")
        raw = np.frombuffer(payload[offset : offset + nbytes], dtype=_TENSOR_DTYPE)
        tensors[entry["name"]] = raw.reshape(shape).astype(np.float32)
    return tensors


def _assemble(model_id: ModelId, tensors: dict[str, Weights]) -> ToyModel:
    per_layer: dict[int, dict[str, Weights]] = {}
    for name, tensor in tensors.items():
        match = _LAYER_TENSOR.fullmatch(name)
        if match is not None:
            per_layer.setdefault(int(match[1]), {})[match[2]] = tensor
    if sorted(per_layer) != list(range(model_id.config.num_layers)):
        raise FormatError("Weight file layers do not match the model config.")
    return ToyModel(
        id_=model_id,
        embedding=tensors["embedding"],
        layers=tuple(LayerWeights(**per_layer[i]) for i in sorted(per_layer)),
        ln_f_gain=tensors["ln_f_gain"],
        ln_f_bias=tensors["ln_f_bias"],
        unembedding=tensors["unembedding"],
    )
