"""
Axial standing wave of the whole resonator and the mode volumes built on it.
"""

import logging
from dataclasses import replace

import numpy as np
from scipy.integrate import trapezoid

from cav_common.errors import InvalidProfileError
from cav_common.models import (
    CavityGeometry,
    FieldProfile,
    InterfaceMark,
    Layer,
    LayerStack,
    ModeIndex,
)
from cav_optics import field_profile

from .modes import gaussian_mode
from .resonator import Cavity, flat_side_stack, resonant_air_gap

logger = logging.getLogger(__name__)


def resonator_stack(cavity: Cavity) -> LayerStack | None:
    """
    Fiber substrate, fiber coating, air gap, membrane and flat mirror as one stack.

    Returns None when the fiber side is a perfect conductor, since light
    cannot be launched through it.
    """
    fiber = cavity.fiber_mirror
    if fiber is None or fiber.exit_medium_index is None:
        return None
    geometry = cavity.geometry
    flat = flat_side_stack(cavity)
    air = Layer(geometry.air_gap * 1e3, 1.0)
    return LayerStack(
        incident_medium_index=fiber.exit_medium_index,
        layers=(*reversed(fiber.layers), air, *flat.layers),
        exit_medium_index=flat.exit_medium_index,
    )


def fiber_coating_thickness(cavity: Cavity) -> float:
    """Physical thickness (nm) of the fiber coating, 0 for a bare conductor."""
    if cavity.fiber_mirror is None:
        return 0.0
    return cavity.fiber_mirror.total_thickness


def _shifted(profile: FieldProfile, offset: float) -> FieldProfile:
    return FieldProfile(
        positions=profile.positions + offset,
        intensity=profile.intensity,
        index=profile.index,
        interfaces=tuple(
            InterfaceMark(mark.position + offset, mark.intensity, mark.kind)
            for mark in profile.interfaces
        ),
    )


def axial_profile(
    cavity: Cavity, wavelength: float | None = None, sampling: float = 1.0
) -> FieldProfile:
    """
    |E(z)|² along the cavity axis, fiber coating first.

    Position 0 is the interface between the fiber substrate and its
    coating (or the fiber conductor surface). The flat mirror's substrate is
    not sampled. With a conductor on the fiber side the field is launched
    from the air gap instead, which gives the same standing-wave shape.

    Args:
        cavity: Cavity with mirrors
        wavelength: Vacuum wavelength (nm), default the geometry wavelength
        sampling: Maximum sample spacing (nm)
    """
    wavelength = cavity.geometry.wavelength if wavelength is None else wavelength
    stack = resonator_stack(cavity)
    if stack is not None:
        return field_profile(stack, wavelength, sampling, incident_extent=0.0, exit_extent=0.0)
    air_gap = cavity.geometry.air_gap * 1e3
    profile = field_profile(
        flat_side_stack(cavity), wavelength, sampling, incident_extent=air_gap, exit_extent=0.0
    )
    return _shifted(profile, air_gap)


def emitter_position(cavity: Cavity) -> float:
    """Axial position (nm) of the emitter in the axial_profile frame."""
    geometry = cavity.geometry
    return (
        fiber_coating_thickness(cavity)
        + geometry.air_gap * 1e3
        + geometry.membrane_thickness
        - geometry.emitter_depth
    )


def _energy(profile: FieldProfile) -> tuple[float, float]:
    """∫n²|E|²dz in µm and the peak of n²|E|²."""
    density = profile.index**2 * profile.intensity
    peak = float(np.max(density)) if density.size else 0.0
    if not np.isfinite(peak) or peak <= 0:
        raise InvalidProfileError("field profile has no energy")
    return float(trapezoid(density, profile.positions * 1e-3)), peak


def mode_volume(
    geometry: CavityGeometry, profile: FieldProfile, waist_radius: float | None = None
) -> float:
    """
    Mode volume (µm³) normalized to the energy-density maximum.

    V = ∫n²|E|²dz · (πw₀²/2) / max(n²|E|²).

    Args:
        geometry: Geometry giving the Gaussian waist
        profile: Axial profile, any overall scale
        waist_radius: Override for w₀ (µm)

    Raises:
        InvalidProfileError: If the profile is identically zero
    """
    integral, peak = _energy(profile)
    w0 = gaussian_mode(geometry).waist_radius if waist_radius is None else waist_radius
    return integral * np.pi * w0 * w0 / 2 / peak


def emitter_mode_volume(cavity: Cavity, profile: FieldProfile | None = None) -> float:
    """
    Mode volume (µm³) referenced to the field at the emitter.

    The energy integral is divided by n_d²|E(z_e)|², so an emitter off the
    antinode sees a larger volume.
    """
    profile = axial_profile(cavity) if profile is None else profile
    integral, _ = _energy(profile)
    geometry = cavity.geometry
    local = geometry.membrane_index**2 * profile.intensity_at(emitter_position(cavity))
    if local <= 0:
        raise InvalidProfileError("the emitter sits on a field node")
    w0 = gaussian_mode(geometry).waist_radius
    volume = integral * np.pi * w0 * w0 / 2 / local
    logger.debug(f"emitter mode volume {volume:.4g} um^3 (w0={w0:.4g} um)")
    return volume


def cavity_mode_volume(cavity: Cavity, sampling: float = 1.0) -> float:
    return mode_volume(cavity.geometry, axial_profile(cavity, sampling=sampling))


def on_resonance(cavity: Cavity, longitudinal: int, transverse_order: int = 0) -> Cavity:
    """Copy of ``cavity`` with the air gap set to the given mode's resonance."""
    gap = resonant_air_gap(
        cavity, ModeIndex(longitudinal, transverse_order), cavity.geometry.wavelength
    )
    return replace(cavity, geometry=replace(cavity.geometry, air_gap=gap))
