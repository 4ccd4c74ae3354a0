"""
Simulated funneling efficiency of an emitter inside the membrane.

The emitter couples to one cavity mode with strength g set by the vacuum
field at its position. For a broad emitter (γ* >> g, κ) the rate into the
mode is R = 4g²/(κ + γ* + γ) and the funneling efficiency is
β = R/(R + γ), with γ = 1/lifetime. Quantum efficiency is taken as 1.
"""

import logging
import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from cav_cavity import (
    Cavity,
    axial_profile,
    cavity_spectral_params,
    mode_volume,
    on_resonance,
    resonator_stack,
)
from cav_cavity.resonator import flat_side_stack
from cav_cavity.volume import fiber_coating_thickness
from cav_common.constants import (
    DEBYE_WALLER,
    DIPOLE_ORIENTATION_FACTOR,
    EMITTER_LIFETIME_NS,
    EMITTER_LINEWIDTH_THZ,
    SPEED_OF_LIGHT,
)
from cav_common.errors import InvalidArgumentError
from cav_common.models import FieldProfile, ModeIndex
from cav_optics import segments

logger = logging.getLogger(__name__)

FUNNELING_MODE = ModeIndex(15)
IMPLANTED_FACES = ("air", "mirror")


@dataclass(frozen=True)
class EmitterProperties:
    """Optical properties of the emitter used by the funneling model."""

    linewidth: float = EMITTER_LINEWIDTH_THZ  # THz, γ*/2π
    lifetime: float = EMITTER_LIFETIME_NS  # ns
    zpl_fraction: float = DEBYE_WALLER
    orientation_factor: float = DIPOLE_ORIENTATION_FACTOR

    def __post_init__(self) -> None:
        if self.linewidth <= 0:
            raise InvalidArgumentError(f"emitter linewidth must be positive, got {self.linewidth}")
        if self.lifetime <= 0:
            raise InvalidArgumentError(f"emitter lifetime must be positive, got {self.lifetime}")
        if not 0 < self.zpl_fraction <= 1:
            raise InvalidArgumentError(f"ZPL fraction must lie in (0, 1], got {self.zpl_fraction}")
        if not 0 < self.orientation_factor <= 1:
            raise InvalidArgumentError(
                f"orientation factor must lie in (0, 1], got {self.orientation_factor}"
            )

    @property
    def decay_rate(self) -> float:
        """γ in 1/s."""
        return 1 / (self.lifetime * 1e-9)

    @property
    def dephasing_rate(self) -> float:
        """γ* in rad/s."""
        return 2 * math.pi * self.linewidth * 1e12

    def to_dict(self) -> dict[str, Any]:
        return {
            "linewidth_THz": self.linewidth,
            "lifetime_ns": self.lifetime,
            "xi": self.zpl_fraction,
            "orientation_factor": self.orientation_factor,
            "quantum_efficiency": 1.0,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "EmitterProperties":
        return cls(
            linewidth=float(data.get("linewidth_THz", EMITTER_LINEWIDTH_THZ)),
            lifetime=float(data.get("lifetime_ns", EMITTER_LIFETIME_NS)),
            zpl_fraction=float(data.get("xi", DEBYE_WALLER)),
            orientation_factor=float(data.get("orientation_factor", DIPOLE_ORIENTATION_FACTOR)),
        )


def _intensity_at(cavity: Cavity, positions: np.ndarray) -> np.ndarray:
    """|E|² at axial_profile positions, evaluated from the region amplitudes."""
    stack = resonator_stack(cavity)
    offset = 0.0
    if stack is None:
        stack = flat_side_stack(cavity)
        offset = cavity.geometry.air_gap * 1e3
    wavelength = cavity.geometry.wavelength
    regions = segments(stack, wavelength)[1:]
    stops = np.array([region.stop for region in regions])
    local = np.asarray(positions, dtype=float) - offset
    chosen = np.minimum(np.searchsorted(stops, local), len(regions) - 1)
    return np.array(
        [regions[k].intensity(np.array([z]), wavelength)[0] for k, z in zip(chosen, local, strict=True)]
    )


def _positions(cavity: Cavity, depths: np.ndarray) -> np.ndarray:
    """axial_profile positions of emitters at ``depths`` (nm from the mirror)."""
    geometry = cavity.geometry
    top = fiber_coating_thickness(cavity) + geometry.air_gap * 1e3 + geometry.membrane_thickness
    return top - depths


def _relative_intensity(cavity: Cavity, profile: FieldProfile, depths: np.ndarray) -> np.ndarray:
    """n_d²|E(z_e)|² over the peak of n²|E|²."""
    density = profile.index**2 * profile.intensity
    local = cavity.geometry.membrane_index**2 * _intensity_at(cavity, _positions(cavity, depths))
    return local / float(np.max(density))


def _coupling_prefactor(cavity: Cavity, emitter: EmitterProperties) -> float:
    """3cλ²γ_zpl·orientation/(8πn_d³) in m³/s², to be divided by V_e."""
    geometry = cavity.geometry
    wavelength = geometry.wavelength * 1e-9
    radiative = emitter.zpl_fraction * emitter.decay_rate
    return (
        3 * SPEED_OF_LIGHT * wavelength**2 * radiative * emitter.orientation_factor
        / (8 * math.pi * geometry.membrane_index**3)
    )


def _check_depths(cavity: Cavity, depths: np.ndarray) -> None:
    thickness = cavity.geometry.membrane_thickness
    if np.any(depths < 0) or np.any(depths > thickness):
        raise InvalidArgumentError(
            f"emitter depths must lie inside the {thickness} nm membrane"
        )


def _coupling_squared(
    cavity: Cavity, profile: FieldProfile, relative: np.ndarray, emitter: EmitterProperties
) -> np.ndarray:
    """g² (rad²/s²) from relative emitter intensities; the waist is the fundamental mode's."""
    peak_volume = mode_volume(cavity.geometry, profile) * 1e-18
    return _coupling_prefactor(cavity, emitter) * relative / peak_volume


def coupling_strength(
    cavity: Cavity,
    emitter: EmitterProperties | None = None,
    profile: FieldProfile | None = None,
) -> float:
    """
    Emitter-mode coupling g (rad/s) at the geometry's emitter depth.

    Args:
        cavity: Cavity, normally already on resonance
        emitter: Emitter properties, defaults to the GeV values
        profile: Precomputed axial_profile of ``cavity``

    Returns:
        g = √(3cλ²γ_zpl/(8πn_d³V_e)); 0 on a field node
    """
    emitter = EmitterProperties() if emitter is None else emitter
    profile = axial_profile(cavity) if profile is None else profile
    depths = np.array([cavity.geometry.emitter_depth])
    relative = _relative_intensity(cavity, profile, depths)
    return float(math.sqrt(_coupling_squared(cavity, profile, relative, emitter)[0]))


def funneling_rate(g, kappa: float, emitter: EmitterProperties):
    """R = 4g²/(κ + γ* + γ) in 1/s, κ in rad/s."""
    return 4 * g * g / (kappa + emitter.dephasing_rate + emitter.decay_rate)


def _kappa(cavity: Cavity) -> float:
    """Cavity energy decay rate κ in rad/s."""
    return 2 * math.pi * cavity_spectral_params(cavity).linewidth_fwhm * 1e9


def _betas(
    cavity: Cavity, profile: FieldProfile, depths: np.ndarray, emitter: EmitterProperties
) -> tuple[np.ndarray, np.ndarray]:
    """β and relative emitter intensity for depths in a resonant cavity."""
    _check_depths(cavity, depths)
    relative = _relative_intensity(cavity, profile, depths)
    g_squared = _coupling_squared(cavity, profile, relative, emitter)
    rate = funneling_rate(np.sqrt(g_squared), _kappa(cavity), emitter)
    beta = rate / (rate + emitter.decay_rate)
    return beta, relative


def beta_simulated(
    cavity: Cavity,
    mode: ModeIndex = FUNNELING_MODE,
    emitter: EmitterProperties | None = None,
    sampling: float = 1.0,
) -> float:
    """
    Funneling efficiency into ``mode`` for the geometry's emitter.

    The air gap is first tuned so ``mode`` is resonant at the geometry
    wavelength.

    Args:
        cavity: Geometry and mirrors; finesse must be defined
        mode: Cavity mode the emitter feeds
        emitter: Emitter properties, defaults to the GeV values
        sampling: Field sampling (nm) for the energy integral

    Returns:
        β in [0, 1]

    Raises:
        InvalidArgumentError: If the finesse is undefined
    """
    emitter = EmitterProperties() if emitter is None else emitter
    resonant = on_resonance(cavity, mode.longitudinal, mode.transverse_order)
    profile = axial_profile(resonant, sampling=sampling)
    beta, _ = _betas(resonant, profile, np.array([resonant.geometry.emitter_depth]), emitter)
    return float(beta[0])


@dataclass(frozen=True, eq=False)
class BetaScan:
    """β over a membrane thickness × implantation depth grid."""

    thicknesses: np.ndarray  # nm
    depths: np.ndarray  # nm, from ``implanted_face``
    beta: np.ndarray  # shape (thicknesses, depths)
    intensity: np.ndarray  # n_d²|E|² at the emitter over the peak, same shape
    air_gaps: np.ndarray  # µm, resonant gap per thickness
    top_kinds: tuple[str, ...] = field(default_factory=tuple)  # membrane-top field character
    implanted_face: str = "air"

    def rows(self) -> list[tuple[float, float, float]]:
        """(t_d_nm, depth_nm, beta), thickness major."""
        return [
            (float(t), float(d), float(self.beta[i, j]))
            for i, t in enumerate(self.thicknesses)
            for j, d in enumerate(self.depths)
        ]

    def bands(self, center: float, sigma: float) -> list[dict[str, float]]:
        """
        β at the central depth and its range over ±1σ and ±2σ per thickness.

        Raises:
            InvalidArgumentError: If sigma is not positive or the depth grid misses a band
        """
        if sigma <= 0:
            raise InvalidArgumentError(f"depth spread must be positive, got {sigma}")
        result = []
        for i, thickness in enumerate(self.thicknesses):
            row = {
                "t_d_nm": float(thickness),
                "beta_center": float(np.interp(center, self.depths, self.beta[i])),
            }
            for k in (1, 2):
                inside = np.abs(self.depths - center) <= k * sigma + 1e-9
                if not np.any(inside):
                    raise InvalidArgumentError(f"no scanned depth within {k} sigma of {center} nm")
                row[f"beta_{k}sigma_low"] = float(np.min(self.beta[i, inside]))
                row[f"beta_{k}sigma_high"] = float(np.max(self.beta[i, inside]))
            result.append(row)
        return result

    def peak_thicknesses(self, depth_column: int = 0) -> np.ndarray:
        """Thicknesses where β has an interior local maximum along one depth column."""
        column = self.beta[:, depth_column]
        inner = (column[1:-1] > column[:-2]) & (column[1:-1] >= column[2:])
        return self.thicknesses[1:-1][inner]

    def antinode_thicknesses(self) -> np.ndarray:
        """Thicknesses whose membrane top sits on an antinode of the air-gap field."""
        mask = np.array([kind == "antinode" for kind in self.top_kinds], dtype=bool)
        return self.thicknesses[mask] if mask.size else np.array([])


def _top_kind(cavity: Cavity, profile: FieldProfile) -> str:
    top = fiber_coating_thickness(cavity) + cavity.geometry.air_gap * 1e3
    if not profile.interfaces:
        return "neither"
    mark = min(profile.interfaces, key=lambda m: abs(m.position - top))
    return mark.kind


def beta_depth_scan(
    cavity: Cavity,
    thicknesses: Sequence[float],
    depths: Sequence[float],
    mode: ModeIndex = FUNNELING_MODE,
    emitter: EmitterProperties | None = None,
    implanted_face: str = "air",
    sampling: float = 1.0,
    threads: int = 1,
) -> BetaScan:
    """
    Sweep membrane thickness and emitter depth.

    Each thickness gets its own resonant air gap; every depth at that
    thickness reuses the same standing wave.

    Args:
        cavity: Template cavity; its thickness and emitter depth are replaced
        thicknesses: Membrane thicknesses (nm)
        depths: Implantation depths (nm) measured from ``implanted_face``
        mode: Cavity mode the emitter feeds
        emitter: Emitter properties, defaults to the GeV values
        implanted_face: "air" (depth below the exposed surface) or "mirror"
        sampling: Field sampling (nm)
        threads: Worker threads over thicknesses

    Returns:
        BetaScan with rows in input order

    Raises:
        InvalidArgumentError: For an unknown face, empty grids or depths outside a membrane
    """
    if implanted_face not in IMPLANTED_FACES:
        raise InvalidArgumentError(f"implanted_face must be 'air' or 'mirror', got {implanted_face!r}")
    grid = np.asarray(thicknesses, dtype=float)
    offsets = np.asarray(depths, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or offsets.ndim != 1 or offsets.size == 0:
        raise InvalidArgumentError("thickness and depth grids must be non-empty 1-D sequences")
    if np.any(grid <= 0):
        raise InvalidArgumentError("membrane thicknesses must be positive")
    if np.any(offsets < 0) or np.any(offsets > grid.min()):
        raise InvalidArgumentError(
            f"depths must lie in [0, {grid.min()}] nm for every scanned membrane"
        )
    emitter = EmitterProperties() if emitter is None else emitter

    def scan(thickness: float) -> tuple[np.ndarray, np.ndarray, float, str]:
        from_mirror = thickness - offsets if implanted_face == "air" else offsets
        resonant = on_resonance(
            cavity.with_membrane(float(thickness), emitter_depth=0.0),
            mode.longitudinal,
            mode.transverse_order,
        )
        profile = axial_profile(resonant, sampling=sampling)
        beta, intensity = _betas(resonant, profile, from_mirror, emitter)
        return beta, intensity, resonant.geometry.air_gap, _top_kind(resonant, profile)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(scan, grid))

    scan_result = BetaScan(
        thicknesses=grid,
        depths=offsets,
        beta=np.array([r[0] for r in results]),
        intensity=np.array([r[1] for r in results]),
        air_gaps=np.array([r[2] for r in results]),
        top_kinds=tuple(r[3] for r in results),
        implanted_face=implanted_face,
    )
    logger.info(
        f"Beta scan over {grid.size} thicknesses x {offsets.size} depths: "
        f"beta in [{scan_result.beta.min():.3g}, {scan_result.beta.max():.3g}]"
    )
    return scan_result
