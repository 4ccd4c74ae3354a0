"""
Resonance condition of the membrane-loaded plano-concave cavity.

Mirror phases are taken as angle(-r) on the principal branch, so a perfect
conductor contributes 0 and the longitudinal order m counts air
half-waves: without a membrane and without Gouy phase the resonance is
exactly L = m·λ/2. The membrane enters through the reflection of the
membrane-coated flat mirror seen from the air gap.
"""

import cmath
import logging
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from cav_common.constants import RESONANCE_PHASE_TOL
from cav_common.errors import InvalidArgumentError, NonConvergenceError, RootNotFoundError
from cav_common.models import (
    CavityGeometry,
    CavitySpectralParams,
    Layer,
    LayerStack,
    ModeIndex,
)
from cav_optics import stack_response

from .modes import finesse_from_reflectances, gouy_phase, spectral_params

logger = logging.getLogger(__name__)

AIR = 1.0


@dataclass(frozen=True)
class Cavity:
    """
    A geometry plus its two mirror coatings.

    Mirror stacks list their layers from the cavity side; their incident
    media are ignored (the cavity supplies diamond or air). None stands for
    a perfect conductor. ``finesse`` overrides the value implied by the
    mirror reflectances.
    """

    geometry: CavityGeometry
    flat_mirror: LayerStack | None = None
    fiber_mirror: LayerStack | None = None
    finesse: float | None = None

    def with_air_gap(self, air_gap: float) -> "Cavity":
        return replace(self, geometry=replace(self.geometry, air_gap=air_gap))

    def with_wavelength(self, wavelength: float) -> "Cavity":
        return replace(self, geometry=replace(self.geometry, wavelength=wavelength))

    def with_membrane(self, thickness: float, emitter_depth: float | None = None) -> "Cavity":
        depth = self.geometry.emitter_depth if emitter_depth is None else emitter_depth
        return replace(
            self,
            geometry=replace(
                self.geometry, membrane_thickness=thickness, emitter_depth=min(depth, thickness)
            ),
        )


def flat_side_stack(cavity: Cavity) -> LayerStack:
    """Membrane plus flat mirror, seen from the air gap."""
    geometry = cavity.geometry
    membrane = Layer(geometry.membrane_thickness, geometry.membrane_index)
    if cavity.flat_mirror is None:
        return LayerStack(AIR, (membrane,), None)
    return LayerStack(AIR, (membrane, *cavity.flat_mirror.layers), cavity.flat_mirror.exit_medium_index)


def fiber_side_stack(cavity: Cavity) -> LayerStack:
    """Fiber mirror seen from the air gap."""
    if cavity.fiber_mirror is None:
        return LayerStack(AIR, (), None)
    return LayerStack(AIR, cavity.fiber_mirror.layers, cavity.fiber_mirror.exit_medium_index)


def mirror_factor(cavity: Cavity, wavelength: float) -> complex:
    """Product (-r_flat)(-r_fiber); its angle is the mirror part of the round-trip phase."""
    r_flat = stack_response(flat_side_stack(cavity), wavelength).r
    r_fiber = stack_response(fiber_side_stack(cavity), wavelength).r
    return r_flat * r_fiber


def mirror_phase(cavity: Cavity, wavelength: float) -> float:
    """Sum of both principal-branch mirror phases angle(-r)."""
    r_flat = stack_response(flat_side_stack(cavity), wavelength).r
    r_fiber = stack_response(fiber_side_stack(cavity), wavelength).r
    return cmath.phase(-r_flat) + cmath.phase(-r_fiber)


def unwrapped_mirror_phase(cavity: Cavity, wavelengths: np.ndarray) -> np.ndarray:
    """
    Mirror phase along a wavelength grid, continuous across the grid.

    The branch is fixed so that the grid point nearest the geometry
    wavelength carries the principal-branch value, which keeps mode labels
    consistent with resonant_air_gap at that wavelength.
    """
    grid = np.asarray(wavelengths, dtype=float)
    phases = np.unwrap(np.angle([mirror_factor(cavity, float(wl)) for wl in grid]))
    anchor = int(np.argmin(np.abs(grid - cavity.geometry.wavelength)))
    offset = mirror_phase(cavity, float(grid[anchor])) - phases[anchor]
    return phases + 2 * math.pi * round(offset / (2 * math.pi))


def _wavenumber(wavelength: float) -> float:
    """Vacuum wavenumber in 1/µm for a wavelength in nm."""
    return 2 * math.pi / (wavelength * 1e-3)


def _gouy(cavity: Cavity, air_gap: float) -> float:
    geometry = cavity.geometry
    length = air_gap + geometry.membrane_thickness / geometry.membrane_index * 1e-3
    return gouy_phase(length, geometry.radius_of_curvature)


def round_trip_phase(
    cavity: Cavity,
    air_gap: float,
    wavelength: float,
    transverse_order: int = 0,
    include_gouy: bool = True,
    phase_of_mirrors: float | None = None,
) -> float:
    """
    Round-trip phase 2kL + mirror phases - 2(q+1)·Gouy (rad).

    Args:
        cavity: Cavity with mirrors
        air_gap: Air gap (µm)
        wavelength: Vacuum wavelength (nm)
        transverse_order: q
        include_gouy: Drop the Gouy term when False
        phase_of_mirrors: Precomputed mirror phase (e.g. unwrapped along a scan)
    """
    if phase_of_mirrors is None:
        phase_of_mirrors = mirror_phase(cavity, wavelength)
    phase = 2 * _wavenumber(wavelength) * air_gap + phase_of_mirrors
    if include_gouy:
        phase -= 2 * (transverse_order + 1) * _gouy(cavity, air_gap)
    return phase


def _stability_limit(cavity: Cavity) -> float:
    geometry = cavity.geometry
    return geometry.radius_of_curvature - geometry.membrane_thickness / geometry.membrane_index * 1e-3


def resonant_air_gap(
    cavity: Cavity,
    mode: ModeIndex,
    wavelength: float,
    include_gouy: bool = True,
    phase_of_mirrors: float | None = None,
) -> float:
    """
    Air gap (µm) at which ``mode`` is resonant at ``wavelength``.

    The bracket starts at the Gouy-free solution and extends by (q+1)·λ/2,
    clipped to the stability limit; Brent's method (bisection with secant
    and inverse-quadratic steps) refines it.

    Raises:
        RootNotFoundError: If the bracket holds no resonance
        NonConvergenceError: If the phase residual exceeds tolerance
    """
    if phase_of_mirrors is None:
        phase_of_mirrors = mirror_phase(cavity, wavelength)
    target = 2 * math.pi * mode.longitudinal
    k = _wavenumber(wavelength)
    start = (target - phase_of_mirrors) / (2 * k)

    if not include_gouy:
        if start <= 0:
            raise RootNotFoundError(f"mode {mode.label()} needs a non-positive air gap")
        return start

    def residual(air_gap: float) -> float:
        return (
            round_trip_phase(
                cavity, air_gap, wavelength, mode.transverse_order, True, phase_of_mirrors
            )
            - target
        )

    limit = _stability_limit(cavity) * (1 - 1e-12)
    low = max(start, 1e-9)
    high = min(start + (mode.transverse_order + 1) * wavelength * 1e-3 / 2, limit)
    if low >= high:
        raise RootNotFoundError(
            f"mode {mode.label()} at {wavelength} nm lies outside the stable range"
        )
    f_low, f_high = residual(low), residual(high)
    if f_low > 0 or f_high < 0:
        raise RootNotFoundError(
            f"no resonance of {mode.label()} at {wavelength} nm between "
            f"{low:.6g} and {high:.6g} um"
        )
    root = brentq(residual, low, high, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=200)
    error = abs(residual(root))
    if error > RESONANCE_PHASE_TOL:
        raise NonConvergenceError(f"resonance phase residual {error:.3g} rad for {mode.label()}")
    logger.debug(f"{mode.label()} resonant at air gap {root:.9f} um ({wavelength} nm)")
    return root


def resonant_wavelength(
    cavity: Cavity,
    mode: ModeIndex,
    window: tuple[float, float] | None = None,
    include_gouy: bool = True,
    samples: int = 401,
) -> float:
    """
    Resonant wavelength (nm) of ``mode`` at the geometry's air gap.

    Mirror phases are unwrapped along a grid over ``window`` (default ±10%
    around the geometry wavelength); the crossing nearest the geometry
    wavelength is refined with Brent's method on a phase made continuous
    from the neighbouring grid point.
    """
    center = cavity.geometry.wavelength
    low, high = window if window is not None else (0.9 * center, 1.1 * center)
    if not 0 < low < high:
        raise InvalidArgumentError(f"invalid wavelength window ({low}, {high})")
    grid = np.linspace(low, high, samples)
    factors = [mirror_factor(cavity, float(wl)) for wl in grid]
    phases = unwrapped_mirror_phase(cavity, grid)
    air_gap = cavity.geometry.air_gap
    target = 2 * math.pi * mode.longitudinal

    def residual(wavelength: float, anchor: int) -> float:
        local = phases[anchor] + cmath.phase(mirror_factor(cavity, wavelength) / factors[anchor])
        return (
            round_trip_phase(
                cavity, air_gap, wavelength, mode.transverse_order, include_gouy, local
            )
            - target
        )

    values = np.array([residual(float(wl), i) for i, wl in enumerate(grid)])
    crossings = np.flatnonzero(np.sign(values[:-1]) != np.sign(values[1:]))
    if crossings.size == 0:
        raise RootNotFoundError(f"no resonance of {mode.label()} in [{low}, {high}] nm")
    best = int(min(crossings, key=lambda i: abs(grid[i] - center)))
    root = brentq(residual, grid[best], grid[best + 1], args=(best,), xtol=1e-12, maxiter=200)
    logger.debug(f"{mode.label()} resonant at {root:.6f} nm (air gap {air_gap} um)")
    return float(root)


def resonance_condition(
    cavity: Cavity,
    mode: ModeIndex,
    solve_for: str = "air_gap",
    include_gouy: bool = True,
) -> float:
    """
    Solve the resonance condition of one mode.

    Args:
        cavity: Cavity with mirrors
        mode: Longitudinal and transverse order
        solve_for: "air_gap" (µm, at the geometry wavelength) or
            "wavelength" (nm, at the geometry air gap)
        include_gouy: Include the (q+1)·Gouy term

    Returns:
        Resonant air gap in µm or resonant wavelength in nm
    """
    if solve_for == "air_gap":
        return resonant_air_gap(cavity, mode, cavity.geometry.wavelength, include_gouy)
    if solve_for == "wavelength":
        return resonant_wavelength(cavity, mode, include_gouy=include_gouy)
    raise InvalidArgumentError(f"solve_for must be 'air_gap' or 'wavelength', got {solve_for!r}")


def _phase_slope(stack: LayerStack, wavelength: float) -> float:
    """dφ/dk of a stack's reflection, central difference in k (µm)."""
    k = _wavenumber(wavelength)
    h = 1e-6 * k
    r_plus = stack_response(stack, 2 * math.pi / (k + h) * 1e3).r
    r_minus = stack_response(stack, 2 * math.pi / (k - h) * 1e3).r
    return cmath.phase(r_plus / r_minus) / (2 * h)


def effective_length(cavity: Cavity, wavelength: float | None = None) -> float:
    """
    Length (µm) that sets the free spectral range.

    Air gap plus half the k-derivative of both reflection phases, which
    covers the membrane's optical path and the penetration into each mirror.
    """
    wavelength = cavity.geometry.wavelength if wavelength is None else wavelength
    flat = _phase_slope(flat_side_stack(cavity), wavelength)
    fiber = _phase_slope(fiber_side_stack(cavity), wavelength)
    return cavity.geometry.air_gap + (flat + fiber) / 2


def cavity_finesse(cavity: Cavity, wavelength: float | None = None) -> float:
    """Configured finesse, or the one implied by both mirror reflectances."""
    if cavity.finesse is not None:
        return cavity.finesse
    if cavity.flat_mirror is None or cavity.fiber_mirror is None:
        raise InvalidArgumentError("finesse is unbounded with a perfect conductor; configure it")
    wavelength = cavity.geometry.wavelength if wavelength is None else wavelength
    R_flat = stack_response(flat_side_stack(cavity), wavelength).R
    R_fiber = stack_response(fiber_side_stack(cavity), wavelength).R
    return finesse_from_reflectances(R_flat, R_fiber)


def cavity_spectral_params(cavity: Cavity, wavelength: float | None = None) -> CavitySpectralParams:
    return spectral_params(cavity_finesse(cavity, wavelength), effective_length(cavity, wavelength))
