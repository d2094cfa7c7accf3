from abc import abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol


@dataclass(frozen=True, slots=True)
class Corpus:
    """Byte-level token stream plus an identifier recorded in projection metadata."""

    tokens: tuple[int, ...]
    corpus_id: str

    def __len__(self) -> int:
        return len(self.tokens)

    def window(self, start: int, length: int) -> tuple[int, ...]:
        """`length` tokens from `start`, wrapping around the end of the stream."""
        n = len(self.tokens)
        return tuple(self.tokens[(start + i) % n] for i in range(length))


class CorpusReader(Protocol):
    @abstractmethod
    def read(self, path: Path | None = None) -> Corpus:
        """
        Reads `path`, or the bundled corpus when None.

        :raises StorageError:
        :raises FormatError:
        """
