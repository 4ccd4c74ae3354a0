"""
Gaussian transverse modes and finesse/linewidth/FSR relations.
"""

import math

from cav_common.constants import SPEED_OF_LIGHT
from cav_common.errors import InvalidArgumentError, StabilityError
from cav_common.models import CavityGeometry, CavitySpectralParams, GaussianMode

# Below this L_eq/R the waist collapses and the paraxial mode is meaningless.
PLANAR_LIMIT = 1e-9


def gouy_phase(equivalent_length: float, radius_of_curvature: float) -> float:
    """One-way Gouy phase arccos(sqrt(1 - L/R)) of a plano-concave cavity."""
    g = 1 - equivalent_length / radius_of_curvature
    if not 0 < g < 1:
        raise StabilityError(
            f"unstable cavity: L_eq={equivalent_length:.6g} um, R={radius_of_curvature:.6g} um"
        )
    return math.acos(math.sqrt(g))


def waist_radius(equivalent_length: float, radius_of_curvature: float, wavelength_nm: float) -> float:
    """
    Waist radius (µm) at the flat mirror.

    Closed form w0² = (λ/π)·sqrt(L(R - L)) with λ in µm.

    Raises:
        StabilityError: Unless 0 < L < R
    """
    if equivalent_length <= PLANAR_LIMIT * radius_of_curvature or equivalent_length >= radius_of_curvature:
        raise StabilityError(
            f"unstable cavity: L_eq={equivalent_length:.6g} um, R={radius_of_curvature:.6g} um"
        )
    wavelength = wavelength_nm * 1e-3
    return math.sqrt(
        wavelength / math.pi * math.sqrt(equivalent_length * (radius_of_curvature - equivalent_length))
    )


def gaussian_mode(geometry: CavityGeometry) -> GaussianMode:
    """
    Fundamental Gaussian mode of the plano-concave cavity.

    The membrane is folded into an air-equivalent length
    L_eq = air_gap + t_d/n_d; the waist sits on the flat mirror and the
    Rayleigh range is evaluated in that air-equivalent space.

    Args:
        geometry: Cavity geometry

    Returns:
        GaussianMode with waist, Rayleigh range and one-way Gouy phase

    Raises:
        StabilityError: If L_eq is not inside (0, R)
    """
    length = geometry.equivalent_length
    radius = geometry.radius_of_curvature
    w0 = waist_radius(length, radius, geometry.wavelength)
    rayleigh = math.pi * w0 * w0 / (geometry.wavelength * 1e-3)
    return GaussianMode(
        waist_radius=w0,
        rayleigh_range=rayleigh,
        gouy_phase_per_pass=gouy_phase(length, radius),
        waist_position=0.0,
    )


def spectral_params(finesse: float, effective_length: float) -> CavitySpectralParams:
    """
    FSR and linewidth from finesse and effective length.

    Args:
        finesse: Cavity finesse
        effective_length: Effective length (µm)

    Returns:
        CavitySpectralParams with FSR in THz and linewidth in GHz
    """
    if finesse <= 0 or effective_length <= 0:
        raise InvalidArgumentError(
            f"finesse and effective length must be positive, got {finesse}, {effective_length}"
        )
    fsr_hz = SPEED_OF_LIGHT / (2 * effective_length * 1e-6)
    return CavitySpectralParams(
        finesse=finesse,
        fsr=fsr_hz * 1e-12,
        linewidth_fwhm=fsr_hz / finesse * 1e-9,
        effective_length=effective_length,
    )


def spectral_params_from_linewidth(finesse: float, linewidth_fwhm: float) -> CavitySpectralParams:
    """Inverse of spectral_params: recover FSR and L_eff from finesse and linewidth (GHz)."""
    if finesse <= 0 or linewidth_fwhm <= 0:
        raise InvalidArgumentError(
            f"finesse and linewidth must be positive, got {finesse}, {linewidth_fwhm}"
        )
    fsr_hz = finesse * linewidth_fwhm * 1e9
    return CavitySpectralParams(
        finesse=finesse,
        fsr=fsr_hz * 1e-12,
        linewidth_fwhm=linewidth_fwhm,
        effective_length=SPEED_OF_LIGHT / (2 * fsr_hz) * 1e6,
    )


def finesse_from_reflectances(R1: float, R2: float) -> float:
    """Finesse π(R1R2)^(1/4)/(1 - sqrt(R1R2)) of a two-mirror resonator."""
    if not (0 < R1 < 1 and 0 < R2 < 1):
        raise InvalidArgumentError(f"reflectances must lie in (0, 1), got {R1}, {R2}")
    product = math.sqrt(R1 * R2)
    return math.pi * math.sqrt(product) / (1 - product)
