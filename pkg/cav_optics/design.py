"""
Quarter-wave Bragg mirror design.

Pair counts are found by sweeping N upward with an incrementally extended
transfer matrix; the first N meeting the transmission target is returned.
The dual-band variant also shifts the quarter-wave center inside the stop
band so a second wavelength is either passed or blocked.
"""

import logging
import math
from collections.abc import Iterator
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any

import numpy as np

from cav_common.constants import N_AIR, N_SIO2
from cav_common.errors import DesignInfeasibleError, InvalidArgumentError
from cav_common.models import Layer, LayerStack

from .transfer import interface_matrix, stack_response

logger = logging.getLogger(__name__)

PPM = 1e-6
MAX_PAIRS = 200
TERMINATIONS = ("hi", "lo")


@dataclass(frozen=True)
class MirrorDesign:
    """A designed stack together with the design choices behind it."""

    stack: LayerStack
    pairs: int
    termination: str
    center_wavelength: float  # nm, quarter-wave wavelength
    transmission_ppm: float  # at the design wavelength
    second_wavelength: float | None = None
    second_transmission: float | None = None

    def to_dict(self) -> dict[str, Any]:
        result: dict[str, Any] = {
            "pairs": self.pairs,
            "termination": self.termination,
            "center_wavelength_nm": self.center_wavelength,
            "transmission_ppm": self.transmission_ppm,
            "layer_count": len(self.stack.layers),
        }
        if self.second_wavelength is not None:
            result["second_wavelength_nm"] = self.second_wavelength
            result["second_transmission"] = self.second_transmission
        return result


def stop_band_halfwidth(n_hi: float, n_lo: float) -> float:
    """Relative half-width Δg of the first stop band, in units of center frequency."""
    return 2 / math.pi * math.asin((n_hi - n_lo) / (n_hi + n_lo))


def bragg_layers(
    center_wavelength: float, n_hi: float, n_lo: float, pairs: int, termination: str
) -> tuple[Layer, ...]:
    """
    Quarter-wave layers listed from the incident side.

    "hi" gives (H L) x pairs; "lo" puts one extra L in front.
    """
    if termination not in TERMINATIONS:
        raise InvalidArgumentError(f"termination must be 'hi' or 'lo', got {termination!r}")
    if pairs < 0:
        raise InvalidArgumentError(f"pair count must be >= 0, got {pairs}")
    high = Layer(center_wavelength / (4 * n_hi), n_hi)
    low = Layer(center_wavelength / (4 * n_lo), n_lo)
    head = (low,) if termination == "lo" else ()
    return head + (high, low) * pairs


def _check_design_inputs(target_ppm: float, wavelength: float, n_hi: float, n_lo: float) -> None:
    if not 0 < target_ppm <= 1e6:
        raise InvalidArgumentError(f"target must lie in (0, 1e6] ppm, got {target_ppm}")
    if not wavelength > 0:
        raise InvalidArgumentError(f"wavelength must be positive, got {wavelength} nm")
    if n_hi == n_lo:
        raise DesignInfeasibleError("n_hi equals n_lo: the stack has no index contrast")
    if n_lo < 1 or n_hi < n_lo:
        raise InvalidArgumentError(f"need n_hi > n_lo >= 1, got n_hi={n_hi}, n_lo={n_lo}")


def _transmission_sweep(
    wavelength: float,
    center_wavelength: float,
    n_hi: float,
    n_lo: float,
    termination: str,
    incident_index: complex,
    substrate_index: complex,
    max_pairs: int,
) -> Iterator[tuple[int, float]]:
    """Yield (N, T) for N = 0, 1, ... by appending one pair at a time."""

    def step(n_from: complex, n_to: float) -> np.ndarray:
        phase = 2 * math.pi * n_to * (center_wavelength / (4 * n_to)) / wavelength
        propagate = np.array(
            [[np.exp(-1j * phase), 0], [0, np.exp(1j * phase)]], dtype=complex
        )
        return interface_matrix(n_from, n_to) @ propagate

    interior = np.eye(2, dtype=complex)
    last: complex = incident_index
    if termination == "lo":
        interior = interior @ step(last, n_lo)
        last = n_lo
    period_start = step(last, n_hi) @ step(n_hi, n_lo)
    period = step(n_lo, n_hi) @ step(n_hi, n_lo)
    ratio = substrate_index.real / incident_index.real
    for pairs in range(max_pairs + 1):
        if pairs == 1:
            interior = interior @ period_start
            last = n_lo
        elif pairs > 1:
            interior = interior @ period
        total = interior @ interface_matrix(last, substrate_index)
        yield pairs, ratio * abs(1 / total[0, 0]) ** 2


def design_bragg_mirror(
    target_T: float,
    wavelength: float,
    n_hi: float,
    n_lo: float,
    termination: str,
    incident_index: complex = N_AIR,
    substrate_index: complex = N_SIO2,
    max_pairs: int = MAX_PAIRS,
) -> LayerStack:
    """
    Design the quarter-wave mirror with the fewest pairs meeting a target.

    Args:
        target_T: Transmission target (ppm)
        wavelength: Design wavelength (nm)
        n_hi: High index
        n_lo: Low index
        termination: "hi" or "lo", the layer facing the incident medium
        incident_index: Medium on the incident side
        substrate_index: Exit medium
        max_pairs: Give up beyond this pair count

    Returns:
        LayerStack whose transmittance at ``wavelength`` is at most target_T

    Raises:
        DesignInfeasibleError: If no pair count up to max_pairs reaches the target
    """
    design = _design(
        target_T, wavelength, wavelength, n_hi, n_lo, termination,
        complex(incident_index), complex(substrate_index), max_pairs,
    )
    if design is None:
        raise DesignInfeasibleError(
            f"no {termination}-terminated stack with <= {max_pairs} pairs reaches {target_T} ppm"
        )
    logger.info(
        f"Designed {termination}-terminated mirror: {design.pairs} pairs, "
        f"T={design.transmission_ppm:.3g} ppm at {wavelength} nm"
    )
    return design.stack


def _design(
    target_ppm: float,
    wavelength: float,
    center_wavelength: float,
    n_hi: float,
    n_lo: float,
    termination: str,
    incident_index: complex,
    substrate_index: complex,
    max_pairs: int,
) -> MirrorDesign | None:
    _check_design_inputs(target_ppm, wavelength, n_hi, n_lo)
    if termination not in TERMINATIONS:
        raise InvalidArgumentError(f"termination must be 'hi' or 'lo', got {termination!r}")
    for pairs, transmission in _transmission_sweep(
        wavelength, center_wavelength, n_hi, n_lo, termination,
        incident_index, substrate_index, max_pairs,
    ):
        if transmission <= target_ppm * PPM:
            stack = LayerStack(
                incident_medium_index=incident_index,
                layers=bragg_layers(center_wavelength, n_hi, n_lo, pairs, termination),
                exit_medium_index=substrate_index,
            )
            # Report the value of the assembled stack, not of the sweep.
            exact = stack_response(stack, wavelength).T
            return MirrorDesign(stack, pairs, termination, center_wavelength, exact / PPM)
    return None


def design_dual_band_mirror(
    target_T: float,
    wavelength: float,
    second_wavelength: float,
    n_hi: float,
    n_lo: float,
    termination: str,
    second_min_T: float | None = None,
    second_max_T: float | None = None,
    incident_index: complex = N_AIR,
    substrate_index: complex = N_SIO2,
    centers: int = 201,
    max_pairs: int = 60,
    threads: int = 1,
) -> MirrorDesign:
    """
    Design a mirror that also passes or blocks a second wavelength.

    Quarter-wave centers are scanned across the stop band around
    ``wavelength``; for each center the minimal pair count reaching
    ``target_T`` is found and the second-wavelength transmission checked.
    Among feasible centers the fewest pairs win, then the largest margin
    on the second-wavelength constraint.

    Args:
        target_T: Transmission target at ``wavelength`` (ppm)
        wavelength: Design wavelength (nm)
        second_wavelength: Wavelength with the pass/block requirement (nm)
        n_hi: High index
        n_lo: Low index
        termination: "hi" or "lo"
        second_min_T: Require T(second) > this (pass band)
        second_max_T: Require T(second) < this (blocking)
        incident_index: Medium on the incident side
        substrate_index: Exit medium
        centers: Number of center wavelengths scanned
        max_pairs: Pair-count limit per center
        threads: Worker threads for the center scan

    Returns:
        MirrorDesign including the second-wavelength transmission

    Raises:
        DesignInfeasibleError: If no scanned center satisfies both requirements
    """
    if (second_min_T is None) == (second_max_T is None):
        raise InvalidArgumentError("give exactly one of second_min_T or second_max_T")
    _check_design_inputs(target_T, wavelength, n_hi, n_lo)
    halfwidth = stop_band_halfwidth(n_hi, n_lo)
    grid = np.linspace(wavelength * (1 - 0.95 * halfwidth), wavelength * (1 + 0.95 * halfwidth), centers)

    def evaluate(center: float) -> tuple[MirrorDesign, float] | None:
        design = _design(
            target_T, wavelength, float(center), n_hi, n_lo, termination,
            complex(incident_index), complex(substrate_index), max_pairs,
        )
        if design is None:
            return None
        second = stack_response(design.stack, second_wavelength).T
        margin = second - second_min_T if second_min_T is not None else second_max_T - second
        if margin <= 0:
            return None
        return (
            MirrorDesign(
                design.stack, design.pairs, termination, float(center),
                design.transmission_ppm, second_wavelength, second,
            ),
            margin,
        )

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        candidates = [item for item in pool.map(evaluate, grid) if item is not None]
    if not candidates:
        raise DesignInfeasibleError(
            f"no quarter-wave center reaches {target_T} ppm at {wavelength} nm while "
            f"meeting the {second_wavelength} nm requirement"
        )
    best, _ = min(candidates, key=lambda item: (item[0].pairs, -item[1], item[0].center_wavelength))
    logger.info(
        f"Designed dual-band mirror: {best.pairs} pairs centered at "
        f"{best.center_wavelength:.1f} nm, T({second_wavelength:g} nm)={best.second_transmission:.4g}"
    )
    return best
