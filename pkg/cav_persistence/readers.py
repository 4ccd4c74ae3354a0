"""
Readers for config JSON and measurement CSV files.

All failures surface as ConfigError so the CLI maps them to the
config/parse exit code.
"""

import csv
import hashlib
import json
import logging
from pathlib import Path
from typing import Any

import numpy as np

from cav_common.errors import ConfigError, InvalidArgumentError
from cav_common.models import CavityGeometry, LayerStack

logger = logging.getLogger(__name__)


def load_json(path: str | Path) -> dict[str, Any]:
    """
    Load a JSON object from disk.

    Raises:
        ConfigError: If the file is missing, unreadable or not an object
    """
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
    except FileNotFoundError:
        raise ConfigError(f"file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}")
    if not isinstance(data, dict):
        raise ConfigError(f"expected a JSON object in {path}")
    return data


def load_stack(path: str | Path) -> LayerStack:
    """Parse a stack definition file."""
    try:
        return LayerStack.from_dict(load_json(path))
    except InvalidArgumentError as exc:
        raise ConfigError(f"invalid stack in {path}: {exc}")


def load_geometry(path: str | Path) -> CavityGeometry:
    """Parse a geometry config file."""
    try:
        return CavityGeometry.from_dict(load_json(path))
    except InvalidArgumentError as exc:
        raise ConfigError(f"invalid geometry in {path}: {exc}")


def read_columns(path: str | Path, names: list[str]) -> dict[str, np.ndarray]:
    """
    Read named numeric columns from a CSV file with a header row.

    Args:
        path: CSV file
        names: Columns to extract

    Returns:
        Mapping from column name to float array

    Raises:
        ConfigError: If the file or a column is missing, or a cell is not numeric
    """
    path = Path(path)
    try:
        with open(path, encoding="utf-8", newline="") as handle:
            reader = csv.DictReader(handle)
            header = reader.fieldnames or []
            missing = [name for name in names if name not in header]
            if missing:
                raise ConfigError(f"invalid data file {path}", missing=missing)
            columns: dict[str, list[float]] = {name: [] for name in names}
            for line, row in enumerate(reader, start=2):
                for name in names:
                    try:
                        columns[name].append(float(row[name]))
                    except (TypeError, ValueError):
                        raise ConfigError(f"{path}:{line}: non-numeric {name}={row[name]!r}")
    except FileNotFoundError:
        raise ConfigError(f"file not found: {path}")
    if not columns[names[0]]:
        raise ConfigError(f"data file {path} has no rows")
    logger.debug(f"Read {len(columns[names[0]])} rows from {path}")
    return {name: np.asarray(values, dtype=float) for name, values in columns.items()}


def file_digest(path: str | Path) -> str:
    """SHA-256 hex digest of a file, recorded for provenance."""
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()
