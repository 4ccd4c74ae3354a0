"""
Config-file and environment handling for cavtool commands.

Settings resolve in a fixed order: command-line option, then environment
variable, then default. File references inside a config are relative to the
config file's directory.
"""

import logging
import os
import sys
from collections.abc import Mapping
from pathlib import Path
from typing import Any

import numpy as np

from cav_cavity import Cavity
from cav_common.constants import DEBYE_WALLER, N_DIAMOND, N_SIO2, N_TA2O5
from cav_common.errors import ConfigError, InvalidArgumentError
from cav_common.models import CavityGeometry, LayerStack, ModeIndex
from cav_optics import design_bragg_mirror, design_dual_band_mirror, stack_response
from cav_optics.design import PPM, MirrorDesign
from cav_persistence import load_geometry, load_json, load_stack

logger = logging.getLogger(__name__)

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
CONSTANT_OVERRIDES = {
    "debye_waller": DEBYE_WALLER,
    "n_diamond": N_DIAMOND,
    "n_sio2": N_SIO2,
    "n_ta2o5": N_TA2O5,
}


def get_log_level(cli_arg: str | None = None) -> str:
    """
    Get the log level from the command line or the environment.

    Priority (highest to lowest):
    1. Command line argument (--log-level)
    2. Environment variable (CAVTOOL_LOG_LEVEL)
    3. WARNING
    """
    if cli_arg:
        return cli_arg.upper()
    env_level = os.environ.get("CAVTOOL_LOG_LEVEL")
    if env_level:
        if env_level.upper() in LOG_LEVELS:
            return env_level.upper()
        logger.warning(f"Ignoring invalid CAVTOOL_LOG_LEVEL={env_level!r}")
    return "WARNING"


def get_threads(cli_arg: int | None = None) -> int:
    """
    Get the worker cap for parameter sweeps.

    Priority (highest to lowest):
    1. Command line argument (--threads)
    2. Environment variable (CAVTOOL_THREADS)
    3. os.cpu_count()
    """
    if cli_arg is not None:
        return max(1, cli_arg)
    env_threads = os.environ.get("CAVTOOL_THREADS")
    if env_threads:
        try:
            value = int(env_threads)
            if value >= 1:
                return value
        except ValueError:
            pass
        logger.warning(f"Ignoring invalid CAVTOOL_THREADS={env_threads!r}")
    return os.cpu_count() or 1


def setup_logging(level: str) -> None:
    """Send log records to stderr so stdout carries only the command summary."""
    logging.basicConfig(level=getattr(logging, level), format=LOG_FORMAT, stream=sys.stderr)


class CommandConfig:
    """
    A parsed ``--config`` file.

    Wraps the raw mapping with typed accessors that raise ConfigError and
    resolve file references against the config's directory.
    """

    def __init__(self, path: str | Path, threads: int = 1):
        self.path = Path(path)
        self.threads = threads
        self.base = self.path.parent
        self.data = load_json(self.path)
        self.constants = self._constants()

    def _constants(self) -> dict[str, float]:
        overrides = self.data.get("constants", {})
        if not isinstance(overrides, Mapping):
            raise ConfigError(f"{self.path}: 'constants' must be an object")
        unknown = sorted(set(overrides) - set(CONSTANT_OVERRIDES))
        if unknown:
            raise ConfigError(f"{self.path}: unknown constants {', '.join(unknown)}")
        try:
            return {key: float(value) for key, value in overrides.items()}
        except (TypeError, ValueError):
            raise ConfigError(f"{self.path}: constants must be numbers")

    def constant(self, name: str) -> float:
        return self.constants.get(name, CONSTANT_OVERRIDES[name])

    def require(self, *keys: str) -> None:
        missing = [key for key in keys if key not in self.data]
        if missing:
            raise ConfigError(f"invalid config {self.path}", missing=missing)

    def get(self, key: str, default: Any = None) -> Any:
        return self.data.get(key, default)

    def resolve(self, reference: str) -> Path:
        return self.base / reference

    def grid(self, key: str, default: Any = None) -> np.ndarray:
        """A numeric grid: a list, or {start, stop, count} or {start, stop, step}."""
        spec = self.data.get(key, default)
        if spec is None:
            raise ConfigError(f"invalid config {self.path}", missing=[key])
        return parse_grid(spec, key)

    def stack(self, entry: Any, name: str) -> LayerStack | None:
        """A mirror or stack: null, a file name, a {"design": ...} block or an inline stack."""
        if entry is None:
            return None
        if isinstance(entry, str):
            return load_stack(self.resolve(entry))
        if not isinstance(entry, Mapping):
            raise ConfigError(f"{self.path}: {name} must be null, a file name or an object")
        if "design" in entry:
            return self.design(entry["design"]).stack
        try:
            return LayerStack.from_dict(dict(entry))
        except InvalidArgumentError as e:
            raise ConfigError(f"{self.path}: invalid {name}: {e}")

    def design(self, block: Mapping[str, Any]) -> MirrorDesign:
        """Run a mirror design described by a config block."""
        missing = [key for key in ("target_ppm", "wavelength_nm", "termination") if key not in block]
        if missing:
            raise ConfigError(f"invalid mirror design in {self.path}", missing=missing)
        n_hi = float(block.get("n_hi", self.constant("n_ta2o5")))
        n_lo = float(block.get("n_lo", self.constant("n_sio2")))
        incident = float(block.get("incident_index", 1.0))
        substrate = float(block.get("substrate_index", self.constant("n_sio2")))
        target = float(block["target_ppm"])
        wavelength = float(block["wavelength_nm"])
        termination = str(block["termination"])
        if "second_wavelength_nm" in block:
            return design_dual_band_mirror(
                target,
                wavelength,
                float(block["second_wavelength_nm"]),
                n_hi,
                n_lo,
                termination,
                second_min_T=_optional_float(block, "second_min_T"),
                second_max_T=_optional_float(block, "second_max_T"),
                incident_index=incident,
                substrate_index=substrate,
                centers=int(block.get("centers", 201)),
                threads=self.threads,
            )
        stack = design_bragg_mirror(
            target, wavelength, n_hi, n_lo, termination,
            incident_index=incident, substrate_index=substrate,
        )
        return MirrorDesign(
            stack, len(stack.layers) // 2, termination, wavelength,
            stack_response(stack, wavelength).T / PPM,
        )

    def geometry(self, entry: Any) -> CavityGeometry:
        if isinstance(entry, str):
            return load_geometry(self.resolve(entry))
        if not isinstance(entry, Mapping):
            raise ConfigError(f"{self.path}: geometry must be a file name or an object")
        data = dict(entry)
        data.setdefault("n_d", self.constant("n_diamond"))
        try:
            return CavityGeometry.from_dict(data)
        except InvalidArgumentError as e:
            raise ConfigError(f"{self.path}: invalid geometry: {e}")

    def cavity(self) -> Cavity:
        """The ``cavity`` section: geometry plus both mirrors and an optional finesse."""
        self.require("cavity")
        section = self.data["cavity"]
        if not isinstance(section, Mapping) or "geometry" not in section:
            raise ConfigError(f"invalid cavity in {self.path}", missing=["geometry"])
        finesse = section.get("finesse")
        return Cavity(
            geometry=self.geometry(section["geometry"]),
            flat_mirror=self.stack(section.get("flat_mirror"), "flat_mirror"),
            fiber_mirror=self.stack(section.get("fiber_mirror"), "fiber_mirror"),
            finesse=None if finesse is None else float(finesse),
        )


def _optional_float(block: Mapping[str, Any], key: str) -> float | None:
    return None if block.get(key) is None else float(block[key])


def parse_grid(spec: Any, name: str) -> np.ndarray:
    """
    Parse a grid specification.

    Raises:
        ConfigError: If the specification is malformed
    """
    if isinstance(spec, (int, float)):
        return np.array([float(spec)])
    if isinstance(spec, list):
        try:
            return np.asarray(spec, dtype=float)
        except (TypeError, ValueError):
            raise ConfigError(f"grid {name} must contain numbers")
    if not isinstance(spec, Mapping):
        raise ConfigError(f"grid {name} must be a number, a list or an object")
    missing = [key for key in ("start", "stop") if key not in spec]
    if "count" not in spec and "step" not in spec:
        missing.append("count")
    if missing:
        raise ConfigError(f"invalid grid {name}", missing=missing)
    start, stop = float(spec["start"]), float(spec["stop"])
    if "count" in spec:
        count = int(spec["count"])
    else:
        step = float(spec["step"])
        if step <= 0:
            raise ConfigError(f"grid {name}: step must be positive")
        count = int(round((stop - start) / step)) + 1
    if count < 1 or stop < start:
        raise ConfigError(f"grid {name}: need stop >= start and at least one point")
    return np.linspace(start, stop, count)


def parse_mode(spec: Any) -> ModeIndex:
    """A mode given as [m, q], {"m": .., "q": ..} or a bare m."""
    try:
        if isinstance(spec, Mapping):
            return ModeIndex(int(spec["m"]), int(spec.get("q", 0)))
        if isinstance(spec, list):
            return ModeIndex(int(spec[0]), int(spec[1]) if len(spec) > 1 else 0)
        return ModeIndex(int(spec))
    except (KeyError, TypeError, ValueError, IndexError):
        raise ConfigError(f"invalid mode {spec!r}")
