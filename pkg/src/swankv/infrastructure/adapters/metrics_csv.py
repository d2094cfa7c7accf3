import csv
import logging
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import TextIO

from swankv.application.common.ports.metrics_writer import MetricsRow
from swankv.infrastructure.exceptions.storage import StorageError

log = logging.getLogger(__name__)


class CsvMetricsWriter:
    """UTF-8 CSV with a header row; floats written with full repr precision."""

    def write(
        self,
        rows: Sequence[MetricsRow],
        fieldnames: Sequence[str],
        path: Path | None = None,
    ) -> None:
        """
        :raises StorageError:
        """
        if path is None:
            self._write_to(sys.stdout, rows, fieldnames)
            return
        try:
            with open(path, "w", encoding="utf-8", newline="") as stream:
                self._write_to(stream, rows, fieldnames)
        except OSError as err:
            raise StorageError(f"Cannot write CSV {path}: {err}") from err
        log.info("CSV written: '%s' (%d rows).", path, len(rows))

    @staticmethod
    def _write_to(
        stream: TextIO,
        rows: Sequence[MetricsRow],
        fieldnames: Sequence[str],
    ) -> None:
        writer = csv.DictWriter(
            stream,
            fieldnames=list(fieldnames),
            lineterminator="\n",
        )
        writer.writeheader()
        writer.writerows(rows)
