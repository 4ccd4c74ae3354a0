"""
cavtool persistence module.

File-based implementations for reading configs and measurement data and for
writing reports. Depends on cav_common for the domain models and the
ResultStore interface.
"""

from .directory_store import DirectoryResultStore, dumps, format_cell
from .readers import file_digest, load_geometry, load_json, load_stack, read_columns

__all__ = [
    "DirectoryResultStore",
    "dumps",
    "file_digest",
    "format_cell",
    "load_geometry",
    "load_json",
    "load_stack",
    "read_columns",
]
