"""
Standing-wave field profiles inside a stack.

Amplitudes are back-propagated from the exit medium, normalized to a unit
forward wave in the incident medium, and sampled region by region. Position
0 is the stack's first interface.
"""

import math
from dataclasses import dataclass

import numpy as np

from cav_common.errors import InvalidArgumentError
from cav_common.models import FieldProfile, InterfaceMark, LayerStack, index_at

from .transfer import incident_amplitudes, interface_matrix, propagation_matrix

EXTREMUM_TOLERANCE = 0.05


@dataclass(frozen=True)
class Segment:
    """One homogeneous region with its left-edge amplitudes."""

    start: float  # nm
    stop: float  # nm; inf for the exit medium
    index: complex
    forward: complex
    backward: complex

    def field(self, z: np.ndarray, wavelength: float) -> np.ndarray:
        phase = 2 * math.pi * self.index / wavelength * (np.asarray(z, dtype=float) - self.start)
        return self.forward * np.exp(1j * phase) + self.backward * np.exp(-1j * phase)

    def intensity(self, z: np.ndarray, wavelength: float) -> np.ndarray:
        return np.abs(self.field(z, wavelength)) ** 2

    def envelope(self) -> tuple[float, float]:
        """Standing-wave maximum and minimum of |E|² for a lossless region."""
        high = abs(self.forward) + abs(self.backward)
        low = abs(self.forward) - abs(self.backward)
        return high * high, low * low


def segments(stack: LayerStack, wavelength: float) -> list[Segment]:
    """
    Amplitudes in every region, incident medium first.

    The incident segment has start = stop = 0 (it extends to -inf); the exit
    segment is omitted for a perfect-conductor termination.
    """
    front, exit_vector = incident_amplitudes(stack, wavelength)
    n_in = index_at(stack.incident_medium_index, wavelength)
    boundaries = np.concatenate(([0.0], np.cumsum([layer.thickness for layer in stack.layers])))

    # Walk backward from the exit, collecting left-edge amplitudes of each layer.
    layer_amplitudes: list[np.ndarray] = []
    if stack.exit_medium_index is None:
        right = exit_vector
    else:
        n_exit = index_at(stack.exit_medium_index, wavelength)
        last = stack.layers[-1].index_at(wavelength) if stack.layers else n_in
        right = interface_matrix(last, n_exit) @ exit_vector
    for position in range(len(stack.layers) - 1, -1, -1):
        layer = stack.layers[position]
        left = propagation_matrix(layer, wavelength) @ right
        layer_amplitudes.append(left)
        if position > 0:
            right = interface_matrix(stack.layers[position - 1].index_at(wavelength), layer.index_at(wavelength)) @ left
    layer_amplitudes.reverse()

    result = [Segment(0.0, 0.0, n_in, complex(front[0]), complex(front[1]))]
    for number, (layer, amplitudes) in enumerate(zip(stack.layers, layer_amplitudes, strict=True)):
        result.append(
            Segment(
                float(boundaries[number]),
                float(boundaries[number + 1]),
                layer.index_at(wavelength),
                complex(amplitudes[0]),
                complex(amplitudes[1]),
            )
        )
    if stack.exit_medium_index is not None:
        result.append(
            Segment(
                float(boundaries[-1]),
                math.inf,
                index_at(stack.exit_medium_index, wavelength),
                complex(exit_vector[0]),
                complex(exit_vector[1]),
            )
        )
    return result


def field_at(stack: LayerStack, wavelength: float, position: float) -> complex:
    """Complex field amplitude at one position (incident amplitude 1)."""
    regions = segments(stack, wavelength)
    if position <= 0:
        chosen = regions[0]
    else:
        chosen = regions[-1]
        for region in regions[1:]:
            if position <= region.stop:
                chosen = region
                break
        else:
            if stack.exit_medium_index is None:
                return 0j
    return complex(chosen.field(np.array([position]), wavelength)[0])


def classify(intensity: float, high: float, low: float) -> str:
    """Label an intensity relative to the local standing-wave extremes."""
    if high <= 0:
        return "node"
    if intensity >= (1 - EXTREMUM_TOLERANCE) * high:
        return "antinode"
    if intensity <= low + EXTREMUM_TOLERANCE * high:
        return "node"
    return "neither"


def _samples(start: float, stop: float, sampling: float) -> np.ndarray:
    count = max(2, int(math.ceil((stop - start) / sampling - 1e-9)) + 1)
    return np.linspace(start, stop, count)


def field_profile(
    stack: LayerStack,
    wavelength: float,
    sampling: float,
    incident_extent: float | None = None,
    exit_extent: float | None = None,
) -> FieldProfile:
    """
    Sample |E(z)|² through a stack.

    Args:
        stack: Layer stack
        wavelength: Vacuum wavelength (nm)
        sampling: Maximum spacing between samples (nm)
        incident_extent: Length of incident medium to include (default one wavelength)
        exit_extent: Length of exit medium to include (default one wavelength)

    Returns:
        FieldProfile normalized to a unit incident amplitude. Interfaces are
        annotated against the standing-wave envelope on their incident side.
    """
    if not sampling > 0:
        raise InvalidArgumentError(f"sampling must be positive, got {sampling} nm")
    incident_extent = wavelength if incident_extent is None else incident_extent
    exit_extent = wavelength if exit_extent is None else exit_extent
    if incident_extent < 0 or exit_extent < 0:
        raise InvalidArgumentError("profile extents must be non-negative")

    regions = segments(stack, wavelength)
    positions: list[np.ndarray] = []
    intensities: list[np.ndarray] = []
    indices: list[np.ndarray] = []

    def add(region: Segment, start: float, stop: float) -> None:
        z = _samples(start, stop, sampling)
        positions.append(z)
        intensities.append(region.intensity(z, wavelength))
        indices.append(np.full(z.shape, region.index.real))

    if incident_extent > 0:
        add(regions[0], -incident_extent, 0.0)
    marks: list[InterfaceMark] = []
    for left, right in zip(regions[:-1], regions[1:], strict=True):
        if right.stop > right.start and math.isfinite(right.stop):
            add(right, right.start, right.stop)
        elif not math.isfinite(right.stop) and exit_extent > 0:
            add(right, right.start, right.start + exit_extent)
        value = float(left.intensity(np.array([right.start]), wavelength)[0])
        high, low = left.envelope()
        marks.append(InterfaceMark(right.start, value, classify(value, high, low)))

    if stack.exit_medium_index is None:
        # Perfect-conductor wall after the last region.
        last = regions[-1]
        wall = stack.total_thickness
        value = float(last.intensity(np.array([wall]), wavelength)[0])
        high, low = last.envelope()
        marks.append(InterfaceMark(wall, value, classify(value, high, low)))

    if not positions:
        raise InvalidArgumentError("profile has no extent to sample")
    return FieldProfile(
        positions=np.concatenate(positions),
        intensity=np.concatenate(intensities),
        index=np.concatenate(indices),
        interfaces=tuple(marks),
    )
