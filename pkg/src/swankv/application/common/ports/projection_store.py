from abc import abstractmethod
from pathlib import Path
from typing import Protocol

from swankv.domain.value_objects.projection_set import ProjectionSet


class ProjectionStore(Protocol):
    @abstractmethod
    def save(self, projections: ProjectionSet, path: Path) -> None:
        """
        :raises StorageError:
        """

    @abstractmethod
    def load(self, path: Path) -> ProjectionSet:
        """
        :raises StorageError:
        :raises FormatError:
        """
