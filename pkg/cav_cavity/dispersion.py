"""
Mode dispersion: resonant air gap against wavelength.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from cav_common.errors import InvalidArgumentError, RootNotFoundError
from cav_common.models import ModeIndex

from .resonator import Cavity, mirror_phase, resonant_air_gap, unwrapped_mirror_phase

logger = logging.getLogger(__name__)

DEFAULT_HALFWIDTH = 0.005  # µm, Lorentzian half-width in air gap
TRANSVERSE_ORDERS = (0, 1)


@dataclass(frozen=True)
class Resonance:
    mode: ModeIndex
    wavelength: float  # nm
    air_gap: float  # µm


@dataclass(frozen=True, eq=False)
class DispersionMap:
    """Resonance proximity on an air gap × wavelength grid."""

    air_gaps: np.ndarray  # µm
    wavelengths: np.ndarray  # nm
    values: np.ndarray  # shape (air gaps, wavelengths)
    resonances: tuple[Resonance, ...] = field(default_factory=tuple)

    def rows(self) -> list[tuple[float, float, float]]:
        """(air_gap_um, lambda_nm, value), air gap major."""
        return [
            (float(gap), float(wl), float(self.values[i, j]))
            for i, gap in enumerate(self.air_gaps)
            for j, wl in enumerate(self.wavelengths)
        ]

    def peak_air_gaps(self, column: int) -> np.ndarray:
        """Air gaps of the local maxima in one wavelength column."""
        values = self.values[:, column]
        inner = (values[1:-1] > values[:-2]) & (values[1:-1] >= values[2:])
        return self.air_gaps[1:-1][inner]


def _check_grid(values: np.ndarray, name: str) -> np.ndarray:
    grid = np.asarray(values, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise InvalidArgumentError(f"{name} grid must be a non-empty 1-D array")
    if grid.size > 1 and np.any(np.diff(grid) <= 0):
        raise InvalidArgumentError(f"{name} grid must increase strictly")
    if np.any(grid <= 0):
        raise InvalidArgumentError(f"{name} grid must be positive")
    return grid


def mode_branches(
    cavity: Cavity,
    modes: list[ModeIndex],
    wavelengths: np.ndarray,
    include_gouy: bool = True,
) -> dict[ModeIndex, np.ndarray]:
    """
    Resonant air gap (µm) of each mode across a wavelength grid.

    The mirror phase is unwrapped along the grid, so every branch is
    continuous; labels agree with resonant_air_gap at the grid point
    nearest the geometry wavelength. Entries are nan where the mode has no
    stable resonance.
    """
    grid = _check_grid(wavelengths, "wavelength")
    phases = unwrapped_mirror_phase(cavity, grid)
    branches: dict[ModeIndex, np.ndarray] = {}
    for mode in modes:
        gaps = np.full(grid.shape, np.nan)
        for i, wl in enumerate(grid):
            try:
                gaps[i] = resonant_air_gap(cavity, mode, float(wl), include_gouy, float(phases[i]))
            except RootNotFoundError:
                continue
        branches[mode] = gaps
    return branches


def _resonances_at(
    cavity: Cavity,
    wavelength: float,
    gap_range: tuple[float, float],
    transverse_orders: tuple[int, ...],
    include_gouy: bool,
) -> list[Resonance]:
    phase = mirror_phase(cavity, wavelength)
    half_wave = wavelength * 1e-3 / 2
    first = max(1, math.floor(gap_range[0] / half_wave) - 2)
    last = math.ceil(gap_range[1] / half_wave) + 2
    found: list[Resonance] = []
    for m in range(first, last + 1):
        for q in transverse_orders:
            mode = ModeIndex(m, q)
            try:
                gap = resonant_air_gap(cavity, mode, wavelength, include_gouy, phase)
            except RootNotFoundError:
                continue
            found.append(Resonance(mode, wavelength, gap))
    return found


def dispersion_scan(
    cavity: Cavity,
    air_gaps: np.ndarray,
    wavelengths: np.ndarray,
    transverse_orders: tuple[int, ...] = TRANSVERSE_ORDERS,
    halfwidth: float = DEFAULT_HALFWIDTH,
    include_gouy: bool = True,
    threads: int = 1,
) -> DispersionMap:
    """
    Lorentzian map of resonance proximity.

    Each resonance (m, q) at wavelength λ adds 1/(1 + ((L - L_mq(λ))/w)²)
    to the column of λ, so map maxima trace the resonance curves.

    Args:
        cavity: Cavity with mirrors; its own air gap is ignored
        air_gaps: Air gap grid (µm), strictly increasing
        wavelengths: Wavelength grid (nm), strictly increasing
        transverse_orders: Transverse orders included
        halfwidth: Lorentzian half-width w (µm)
        include_gouy: Include the Gouy term
        threads: Worker threads over wavelengths

    Returns:
        DispersionMap with values shaped (air gaps, wavelengths)
    """
    gaps = _check_grid(air_gaps, "air gap")
    grid = _check_grid(wavelengths, "wavelength")
    if not halfwidth > 0:
        raise InvalidArgumentError(f"half-width must be positive, got {halfwidth}")
    span = (float(gaps[0]), float(gaps[-1]))

    def column(wavelength: float) -> list[Resonance]:
        return _resonances_at(cavity, float(wavelength), span, transverse_orders, include_gouy)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        columns = list(pool.map(column, grid))

    values = np.zeros((gaps.size, grid.size))
    for j, found in enumerate(columns):
        for resonance in found:
            values[:, j] += 1 / (1 + ((gaps - resonance.air_gap) / halfwidth) ** 2)
    resonances = tuple(item for found in columns for item in found)
    logger.info(
        f"Dispersion map: {gaps.size}x{grid.size} grid, {len(resonances)} resonances"
    )
    return DispersionMap(gaps, grid, values, resonances)
