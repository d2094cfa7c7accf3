import hashlib
import logging
from importlib.resources import files
from pathlib import Path
from typing import Final

from swankv.application.common.ports.corpus_reader import Corpus
from swankv.infrastructure.exceptions.storage import FormatError, StorageError

log = logging.getLogger(__name__)

BUNDLED_PACKAGE: Final[str] = "swankv.infrastructure.resources"
BUNDLED_NAME: Final[str] = "corpus.txt"
DIGEST_PREFIX: Final[int] = 12


class ByteCorpusReader:
    """
    Byte-level tokenization: every byte of the file is one token in
    [0, 256). The corpus id is `<file name>:<sha256 prefix>`.
    """

    def read(self, path: Path | None = None) -> Corpus:
        """
        :raises StorageError:
        :raises FormatError:
        """
        try:
            if path is None:
                name = BUNDLED_NAME
                data = files(BUNDLED_PACKAGE).joinpath(BUNDLED_NAME).read_bytes()
            else:
                name = path.name
                data = path.read_bytes()
        except OSError as err:
            raise StorageError(f"Cannot read corpus {path or name}: {err}") from err
        if not data:
            raise FormatError(f"Corpus {name} is empty.")

        digest = hashlib.sha256(data).hexdigest()[:DIGEST_PREFIX]
        log.debug("Corpus '%s': %d bytes, digest %s.", name, len(data), digest)
        return Corpus(tokens=tuple(data), corpus_id=f"{name}:{digest}")
