"""
Debug dump of one hybrid cache, little-endian:

    magic       8s   b"SWANKV01"
    layer, kv_head, d_h, k_key, k_value, buffer   u32 × 6
    precision   u8   0 fp16, 1 fp8, 2 f32
    appended    u64
    sparse      u64  entries per history
    buffered    u32  entries per buffer
    sparse K records, then sparse V records, each:
        k u16, indices u8 × k, values × k in the storage encoding
    buffered K rows, then buffered V rows, d_h elements each in the dense
    buffer encoding (fp16, or f32 for f32 precision)
"""

import struct
from pathlib import Path
from typing import Final

import numpy as np

from swankv.domain.entities.hybrid_kv_cache import HybridKVCache
from swankv.domain.entities.sparse_history import SparseHistory
from swankv.domain.enums.precision import Precision
from swankv.domain.exceptions.base import DomainError
from swankv.domain.services.sparse_cache import create_cache
from swankv.domain.value_objects.cache_params import CacheParams
from swankv.domain.value_objects.cache_slot import CacheSlot
from swankv.domain.value_objects.sparse_vector import STORAGE_DTYPES, SparseVector
from swankv.infrastructure.exceptions.storage import FormatError, StorageError

SNAPSHOT_MAGIC: Final[bytes] = b"SWANKV01"

_HEADER = struct.Struct("<8s6IBQQI")
_RECORD_LEN = struct.Struct("<H")
_PRECISIONS: Final[tuple[Precision, ...]] = tuple(Precision)


class CacheSnapshotCodec:
    def dump(self, cache: HybridKVCache) -> bytes:
        params = cache.params
        parts = [
            _HEADER.pack(
                SNAPSHOT_MAGIC,
                cache.id_.layer,
                cache.id_.kv_head,
                cache.d_h,
                params.k_key,
                params.k_value,
                params.buffer,
                _PRECISIONS.index(cache.precision),
                cache.appended,
                len(cache.sparse_k),
                len(cache.buffer_k),
            ),
        ]
        storage = STORAGE_DTYPES[cache.precision].newbyteorder("<")
        for history in (cache.sparse_k, cache.sparse_v):
            for sv in history:
                parts.append(_RECORD_LEN.pack(sv.k_active))
                parts.append(sv.indices.tobytes())
                parts.append(sv.values.astype(storage).tobytes())
        dense = np.dtype(cache.dense_dtype).newbyteorder("<")
        for rows in (cache.buffer_k, cache.buffer_v):
            parts.extend(np.asarray(row, dtype=dense).tobytes() for row in rows)
        return b"".join(parts)

    def load(self, data: bytes) -> HybridKVCache:
        """
        :raises FormatError:
        """
        try:
            fields = _HEADER.unpack_from(data, 0)
        except struct.error as err:
            raise FormatError(f"Truncated cache snapshot header: {err}") from err
        magic, layer, kv_head, d_h, k_key, k_value, buffer, code = fields[:8]
        appended, n_sparse, n_buffer = fields[8:]
        if magic != SNAPSHOT_MAGIC:
            raise FormatError(f"Not a cache snapshot (magic {magic!r}).")
        if code >= len(_PRECISIONS):
            raise FormatError(f"Unknown precision code {code}.")

        try:
            cache = create_cache(
                CacheSlot(layer=layer, kv_head=kv_head),
                d_h,
                CacheParams(
                    k_key=k_key,
                    k_value=k_value,
                    buffer=buffer,
                    precision=_PRECISIONS[code],
                ),
            )
            reader = _Reader(data, _HEADER.size)
            for history in (cache.sparse_k, cache.sparse_v):
                _read_history(reader, history, n_sparse)
            dense = np.dtype(cache.dense_dtype).newbyteorder("<")
            for rows in (cache.buffer_k, cache.buffer_v):
                for _ in range(n_buffer):
                    rows.append(reader.array(dense, d_h).astype(cache.dense_dtype))
        except (DomainError, struct.error) as err:
            raise FormatError(f"Corrupt cache snapshot: {err}") from err
        if reader.offset != len(data):
            raise FormatError(f"{len(data) - reader.offset} trailing snapshot bytes.")
        cache.appended = appended
        return cache

    def write(self, cache: HybridKVCache, path: Path) -> None:
        """
        :raises StorageError:
        """
        try:
            path.write_bytes(self.dump(cache))
        except OSError as err:
            raise StorageError(f"Cannot write cache snapshot {path}: {err}") from err

    def read(self, path: Path) -> HybridKVCache:
        """
        :raises StorageError:
        :raises FormatError:
        """
        try:
            data = path.read_bytes()
        except OSError as err:
            raise StorageError(f"Cannot read cache snapshot {path}: {err}") from err
        return self.load(data)


class _Reader:
    __slots__ = ("data", "offset")

    def __init__(self, data: bytes, offset: int):
        self.data = data
        self.offset = offset

    def array(self, dtype: np.dtype[np.generic], count: int) -> np.ndarray:
        """
        :raises FormatError:
        """
        end = self.offset + count * dtype.itemsize
        if end > len(self.data):
            raise FormatError("Cache snapshot ends mid-record.")
        out = np.frombuffer(self.data, dtype=dtype, count=count, offset=self.offset)
        self.offset = end
        return out

    def record_len(self) -> int:
        (k,) = _RECORD_LEN.unpack_from(self.data, self.offset)
        self.offset += _RECORD_LEN.size
        return int(k)


def _read_history(reader: _Reader, history: SparseHistory, count: int) -> None:
    storage = STORAGE_DTYPES[history.precision]
    for _ in range(count):
        k = reader.record_len()
        indices = reader.array(np.dtype(np.uint8), k)
        values = reader.array(storage.newbyteorder("<"), k)
        history.append(
            SparseVector(
                indices=indices.copy(),
                values=values.astype(storage),
                precision=history.precision,
            ),
        )
