"""
Abstract result-store interface.

Commands write their reports through this contract so output formatting
(key order, float rendering, line endings) lives in one place and can be
swapped in tests.
"""

from abc import ABC, abstractmethod
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any


class ResultStore(ABC):
    """
    Abstract base class for command outputs.

    Implementations must write deterministically: identical inputs produce
    byte-identical files.
    """

    @abstractmethod
    def path_for(self, name: str) -> Path:
        """
        Resolve an output name to a location.

        Args:
            name: File name relative to the store root

        Returns:
            Absolute path of the output
        """
        pass

    @abstractmethod
    def write_json(self, name: str, data: dict[str, Any]) -> Path:
        """
        Write a JSON report.

        Args:
            name: File name relative to the store root
            data: JSON-serializable mapping

        Returns:
            Path of the written file
        """
        pass

    @abstractmethod
    def write_csv(
        self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]
    ) -> Path:
        """
        Write a table with a header row.

        Args:
            name: File name relative to the store root
            header: Column names
            rows: Row values; floats are rendered with a fixed format

        Returns:
            Path of the written file
        """
        pass

    @abstractmethod
    def list_outputs(self) -> list[str]:
        """
        List files written so far, in write order.

        Returns:
            Output names
        """
        pass
