from abc import abstractmethod
from pathlib import Path
from typing import Protocol

from swankv.domain.entities.toy_model import ToyModel


class WeightStore(Protocol):
    @abstractmethod
    def save(self, model: ToyModel, path: Path) -> None:
        """
        :raises StorageError:
        """

    @abstractmethod
    def load(self, path: Path) -> ToyModel:
        """
        :raises StorageError:
        :raises FormatError:
        """
