"""
Directory-backed implementation of the result store.

Writes pretty-printed JSON with sorted keys and LF-terminated CSV tables, so
rerunning a command with identical inputs reproduces every file byte for byte.
"""

import csv
import json
import logging
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

import numpy as np

from cav_common.store import ResultStore

logger = logging.getLogger(__name__)

FLOAT_FORMAT = ".12g"


def format_cell(value: Any) -> str:
    """Render one CSV cell; floats use a fixed significant-digit format."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), FLOAT_FORMAT)
    return str(value)


def _json_default(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, complex):
        return {"real": value.real, "imag": value.imag}
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def dumps(data: dict[str, Any]) -> str:
    """Serialize a report the way every store writes it."""
    return json.dumps(data, indent=2, sort_keys=True, default=_json_default) + "\n"


class DirectoryResultStore(ResultStore):
    """
    Stores command outputs as files inside one directory.

    The directory is created on first use. Existing files with the same
    name are overwritten.
    """

    def __init__(self, root: str | Path):
        """
        Initialize the store.

        Args:
            root: Output directory
        """
        self.root = Path(root)
        self._written: list[str] = []

    def path_for(self, name: str) -> Path:
        return (self.root / name).resolve()

    def _prepare(self, name: str) -> Path:
        path = self.path_for(name)
        path.parent.mkdir(parents=True, exist_ok=True)
        if name not in self._written:
            self._written.append(name)
        return path

    def write_json(self, name: str, data: dict[str, Any]) -> Path:
        path = self._prepare(name)
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(dumps(data))
        logger.info(f"Wrote {path}")
        return path

    def write_csv(
        self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]
    ) -> Path:
        path = self._prepare(name)
        count = 0
        with open(path, "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([format_cell(value) for value in row])
                count += 1
        logger.info(f"Wrote {path} ({count} rows)")
        return path

    def list_outputs(self) -> list[str]:
        return list(self._written)
