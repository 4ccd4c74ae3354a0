"""
cavtool cavity-model module.

Plano-concave open cavity with a diamond membrane on the flat mirror:
Gaussian modes, the resonance condition, mode dispersion, spectral
parameters and mode volume.
"""

from .dispersion import DispersionMap, Resonance, dispersion_scan, mode_branches
from .modes import (
    finesse_from_reflectances,
    gaussian_mode,
    gouy_phase,
    spectral_params,
    spectral_params_from_linewidth,
    waist_radius,
)
from .resonator import (
    Cavity,
    cavity_finesse,
    cavity_spectral_params,
    effective_length,
    fiber_side_stack,
    flat_side_stack,
    mirror_phase,
    resonance_condition,
    resonant_air_gap,
    resonant_wavelength,
    round_trip_phase,
    unwrapped_mirror_phase,
)
from .volume import (
    axial_profile,
    cavity_mode_volume,
    emitter_mode_volume,
    emitter_position,
    mode_volume,
    on_resonance,
    resonator_stack,
)

__all__ = [
    "Cavity",
    "DispersionMap",
    "Resonance",
    "axial_profile",
    "cavity_finesse",
    "cavity_mode_volume",
    "cavity_spectral_params",
    "dispersion_scan",
    "effective_length",
    "emitter_mode_volume",
    "emitter_position",
    "fiber_side_stack",
    "finesse_from_reflectances",
    "flat_side_stack",
    "gaussian_mode",
    "gouy_phase",
    "mirror_phase",
    "mode_branches",
    "mode_volume",
    "on_resonance",
    "resonance_condition",
    "resonant_air_gap",
    "resonant_wavelength",
    "resonator_stack",
    "round_trip_phase",
    "spectral_params",
    "spectral_params_from_linewidth",
    "unwrapped_mirror_phase",
    "waist_radius",
]
