"""
cavtool command-line package.

The ``cavtool`` click group and the per-command implementations that tie the
optics, cavity, emitter, coupling and fitting packages to config files and
output directories.
"""

__version__ = "0.1.0"

from .cli import cli  # noqa: E402

__all__ = ["__version__", "cli"]
