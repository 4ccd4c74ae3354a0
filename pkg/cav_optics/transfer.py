"""
Transfer-matrix solver for planar stacks at normal incidence.

Conventions:
    Forward waves go as e^{+ikz} (time dependence e^{-iωt}). Inside a layer
    the field is E(z) = A e^{ikn(z - z0)} + B e^{-ikn(z - z0)} with (A, B)
    the amplitudes at the layer's left edge z0. Every matrix maps
    amplitudes on its right to amplitudes on its left, so a stack's system
    matrix is the left-to-right product of its interface and propagation
    matrices and the incident amplitudes follow from the exit amplitudes.
"""

import cmath
import math

import numpy as np

from cav_common.errors import InvalidArgumentError
from cav_common.models import Index, Layer, LayerStack, StackResponse, index_at

PERFECT_CONDUCTOR_EXIT = np.array([1.0, -1.0], dtype=complex)  # E = 0 at the wall


def _check_wavelength(wavelength: float) -> None:
    if not wavelength > 0:
        raise InvalidArgumentError(f"wavelength must be positive, got {wavelength} nm")


def fresnel_coefficients(n1: complex, n2: complex) -> tuple[complex, complex]:
    """
    Amplitude coefficients for light going from medium n1 into n2.

    Returns:
        (r, t) with r = (n1 - n2)/(n1 + n2) and t = 2 n1/(n1 + n2)
    """
    n1 = complex(n1)
    n2 = complex(n2)
    if n1 == 0 or n2 == 0:
        raise InvalidArgumentError("refractive index must be non-zero")
    total = n1 + n2
    return (n1 - n2) / total, 2 * n1 / total


def interface_matrix(n1: complex, n2: complex) -> np.ndarray:
    """
    Interface matrix between medium n1 (left) and n2 (right).

    Equal to D(n1)^-1 D(n2) with D(n) = [[1, 1], [n, -n]], so matrices of
    consecutive interfaces compose and the reverse interface is the inverse.
    """
    r, t = fresnel_coefficients(n1, n2)
    return np.array([[1, r], [r, 1]], dtype=complex) / t


def layer_phase(layer: Layer, wavelength: float) -> complex:
    """Phase 2π·n·d/λ accumulated across a layer (complex for absorbing layers)."""
    _check_wavelength(wavelength)
    return 2 * math.pi * layer.index_at(wavelength) * layer.thickness / wavelength


def propagation_matrix(layer: Layer, wavelength: float) -> np.ndarray:
    """Propagation matrix diag(e^{-iδ}, e^{iδ}) of one layer."""
    delta = layer_phase(layer, wavelength)
    return np.array(
        [[cmath.exp(-1j * delta), 0], [0, cmath.exp(1j * delta)]], dtype=complex
    )


def _media(stack: LayerStack, wavelength: float) -> tuple[complex, list[complex], complex | None]:
    n_in = index_at(stack.incident_medium_index, wavelength)
    n_layers = [layer.index_at(wavelength) for layer in stack.layers]
    n_exit = (
        None if stack.exit_medium_index is None else index_at(stack.exit_medium_index, wavelength)
    )
    return n_in, n_layers, n_exit


def _interior_matrix(stack: LayerStack, wavelength: float) -> tuple[np.ndarray, complex]:
    """Product up to the last layer's right edge, and the index found there."""
    n_in, n_layers, _ = _media(stack, wavelength)
    matrix = np.eye(2, dtype=complex)
    previous = n_in
    for layer, n in zip(stack.layers, n_layers, strict=True):
        matrix = matrix @ interface_matrix(previous, n) @ propagation_matrix(layer, wavelength)
        previous = n
    return matrix, previous


def system_matrix(stack: LayerStack, wavelength: float) -> np.ndarray:
    """
    Full transfer matrix from the exit medium back to the incident medium.

    Raises:
        InvalidArgumentError: For a perfect-conductor exit, which has no exit medium
    """
    _check_wavelength(wavelength)
    if stack.exit_medium_index is None:
        raise InvalidArgumentError("a perfect-conductor exit has no system matrix")
    matrix, last = _interior_matrix(stack, wavelength)
    n_exit = index_at(stack.exit_medium_index, wavelength)
    return matrix @ interface_matrix(last, n_exit)


def incident_amplitudes(stack: LayerStack, wavelength: float) -> tuple[np.ndarray, np.ndarray]:
    """
    Amplitudes in the incident medium at z = 0 and in the exit medium.

    Both vectors are scaled so the incident forward amplitude is 1.
    """
    _check_wavelength(wavelength)
    if stack.exit_medium_index is None:
        matrix, _ = _interior_matrix(stack, wavelength)
        exit_vector = PERFECT_CONDUCTOR_EXIT.copy()
    else:
        matrix = system_matrix(stack, wavelength)
        exit_vector = np.array([1.0, 0.0], dtype=complex)
    front = matrix @ exit_vector
    if front[0] == 0:
        raise InvalidArgumentError("stack has no incident-side solution at this wavelength")
    return front / front[0], exit_vector / front[0]


def stack_response(stack: LayerStack, wavelength: float) -> StackResponse:
    """
    Reflection and transmission of a stack.

    Args:
        stack: Layer stack, layers listed from the incident side
        wavelength: Vacuum wavelength (nm)

    Returns:
        StackResponse with power coefficients R = |r|² and
        T = Re(n_exit)/Re(n_in)·|t|² (T = 0 for a perfect-conductor exit)
    """
    front, exit_vector = incident_amplitudes(stack, wavelength)
    r = complex(front[1])
    n_in, _, n_exit = _media(stack, wavelength)
    if n_exit is None:
        t = 0j
        transmittance = 0.0
    else:
        t = complex(exit_vector[0])
        transmittance = n_exit.real / n_in.real * abs(t) ** 2
    return StackResponse(
        r=r,
        t=t,
        R=abs(r) ** 2,
        T=transmittance,
        phase_on_reflection=cmath.phase(r),
    )


def spectrum(stack: LayerStack, wavelengths: np.ndarray) -> dict[str, np.ndarray]:
    """R, T and reflection phase over a wavelength grid."""
    responses = [stack_response(stack, float(wl)) for wl in np.asarray(wavelengths, dtype=float)]
    return {
        "wavelength": np.asarray(wavelengths, dtype=float),
        "R": np.array([resp.R for resp in responses]),
        "T": np.array([resp.T for resp in responses]),
        "phase": np.array([resp.phase_on_reflection for resp in responses]),
    }


def concatenate(first: LayerStack, second: LayerStack) -> LayerStack:
    """Stack formed by the layers of ``first`` followed by those of ``second``."""
    return LayerStack(
        incident_medium_index=first.incident_medium_index,
        layers=first.layers + second.layers,
        exit_medium_index=second.exit_medium_index,
    )


def reverse(stack: LayerStack) -> LayerStack:
    """The same stack seen from its exit side."""
    if stack.exit_medium_index is None:
        raise InvalidArgumentError("cannot illuminate a perfect conductor from behind")
    return LayerStack(
        incident_medium_index=stack.exit_medium_index,
        layers=tuple(reversed(stack.layers)),
        exit_medium_index=stack.incident_medium_index,
    )


def with_media(
    stack: LayerStack, incident: Index | None = None, exit_index: Index | None = None
) -> LayerStack:
    """Copy of a stack with replaced surrounding media (None keeps the current one)."""
    return LayerStack(
        incident_medium_index=stack.incident_medium_index if incident is None else incident,
        layers=stack.layers,
        exit_medium_index=stack.exit_medium_index if exit_index is None else exit_index,
    )
