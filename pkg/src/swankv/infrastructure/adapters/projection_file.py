"""
Projection file, little-endian:

    magic       8s   b"SWANPROJ"
    version     u32
    d, d_h, num_layers, n_q_heads, n_kv_heads   u32 × 5
    theta_base  f64
    vocab_size  u32
    variant     u8
    seed        u64
    tokens      u64  calibration token count
    corpus_id   u16 length + UTF-8 bytes
    payload     per layer, per KV-head: P_QK then P_VO, row-major f32
"""

import logging
import struct
from pathlib import Path
from typing import Final

import numpy as np

from swankv.domain.enums.projection_variant import ProjectionVariant
from swankv.domain.exceptions.base import DomainError
from swankv.domain.value_objects.model_config.model_config import ModelConfig
from swankv.domain.value_objects.projection_set import (
    CalibrationMetadata,
    ProjectionSet,
)
from swankv.infrastructure.exceptions.storage import FormatError, StorageError

log = logging.getLogger(__name__)

PROJECTION_MAGIC: Final[bytes] = b"SWANPROJ"
PROJECTION_VERSION: Final[int] = 1

_PREAMBLE = struct.Struct("<8sI")
_CONFIG = struct.Struct("<5IdI")
_METADATA = struct.Struct("<BQQH")
_PAYLOAD_DTYPE: Final[np.dtype[np.float32]] = np.dtype("<f4")


class BinaryProjectionStore:
    """Fixed-layout binary codec; byte-identical output for equal sets."""

    def encode(self, projections: ProjectionSet) -> bytes:
        cfg = projections.config
        corpus_id = projections.metadata.corpus_id.encode("utf-8")
        payload = np.stack([projections.p_qk, projections.p_vo], axis=2)
        return b"".join((
            _PREAMBLE.pack(PROJECTION_MAGIC, PROJECTION_VERSION),
            _CONFIG.pack(
                cfg.d,
                cfg.d_h,
                cfg.num_layers,
                cfg.n_q_heads,
                cfg.n_kv_heads,
                cfg.theta_base,
                cfg.vocab_size,
            ),
            _METADATA.pack(
                projections.variant.code,
                projections.metadata.seed,
                projections.metadata.token_count,
                len(corpus_id),
            ),
            corpus_id,
            payload.astype(_PAYLOAD_DTYPE).tobytes(order="C"),
        ))

    def decode(self, data: bytes) -> ProjectionSet:
        """
        :raises FormatError:
        """
        offset = 0
        try:
            magic, version = _PREAMBLE.unpack_from(data, offset)
            offset += _PREAMBLE.size
            if magic != PROJECTION_MAGIC:
                raise FormatError(f"Not a projection file (magic {magic!r}).")
            if version != PROJECTION_VERSION:
                raise FormatError(f"Unsupported projection file version {version}.")
            d, d_h, layers, n_q, n_kv, theta, vocab = _CONFIG.unpack_from(data, offset)
            offset += _CONFIG.size
            code, seed, token_count, id_len = _METADATA.unpack_from(data, offset)
            offset += _METADATA.size
            corpus_id = data[offset : offset + id_len].decode("utf-8")
            offset += id_len
        except (struct.error, UnicodeDecodeError) as err:
            raise FormatError(f"Truncated or corrupt projection header: {err}") from err

        shape = (layers, n_kv, 2, d_h, d_h)
        expected = int(np.prod(shape)) * _PAYLOAD_DTYPE.itemsize
        if len(data) - offset != expected:
            raise FormatError(
                f"Projection payload is {len(data) - offset} bytes, "
                f"expected {expected}.",
            )
        payload = np.frombuffer(data, dtype=_PAYLOAD_DTYPE, offset=offset)
        payload = payload.reshape(shape).astype(np.float32)

        try:
            return ProjectionSet(
                config=ModelConfig(
                    d=d,
                    d_h=d_h,
                    num_layers=layers,
                    n_q_heads=n_q,
                    n_kv_heads=n_kv,
                    theta_base=theta,
                    vocab_size=vocab,
                ),
                p_qk=payload[:, :, 0],
                p_vo=payload[:, :, 1],
                variant=ProjectionVariant.from_code(code),
                metadata=CalibrationMetadata(
                    seed=seed,
                    token_count=token_count,
                    corpus_id=corpus_id,
                ),
            )
        except (DomainError, ValueError) as err:
            raise FormatError(f"Invalid projection file contents: {err}") from err

    def save(self, projections: ProjectionSet, path: Path) -> None:
        """
        :raises StorageError:
        """
        try:
            path.write_bytes(self.encode(projections))
        except OSError as err:
            raise StorageError(f"Cannot write projection file {path}: {err}") from err
        log.debug("Projection file written: '%s'.", path)

    def load(self, path: Path) -> ProjectionSet:
        """
        :raises StorageError:
        :raises FormatError:
        """
        try:
            data = path.read_bytes()
        except OSError as err:
            raise StorageError(f"Cannot read projection file {path}: {err}") from err
        return self.decode(data)
