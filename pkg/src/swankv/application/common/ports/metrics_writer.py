from abc import abstractmethod
from collections.abc import Mapping, Sequence
from pathlib import Path
from typing import Protocol

MetricsRow = Mapping[str, object]


class MetricsWriter(Protocol):
    @abstractmethod
    def write(
        self,
        rows: Sequence[MetricsRow],
        fieldnames: Sequence[str],
        path: Path | None = None,
    ) -> None:
        """
        Writes a header row then `rows`; standard output when `path` is None.

        :raises StorageError:
        """
