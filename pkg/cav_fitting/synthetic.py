"""
Seeded synthetic datasets for validating the fits.

Noise is Gaussian with a standard deviation of ``noise`` times the largest
model value; ``noise=0`` returns the exact model.
"""

from collections.abc import Sequence

import numpy as np

from cav_common.errors import InvalidArgumentError
from cav_common.models import G2Model, SaturationParams

from .models import GaussianPeak, g2_objective, gaussian_objective, saturation_objective


def _noisy(exact: np.ndarray, noise: float, rng: np.random.Generator) -> np.ndarray:
    if noise < 0:
        raise InvalidArgumentError(f"noise must be >= 0, got {noise}")
    if noise == 0:
        return exact
    return exact + noise * float(np.max(np.abs(exact))) * rng.standard_normal(exact.shape)


def synth_g2(
    model: G2Model, taus: Sequence[float], noise: float, rng: np.random.Generator
) -> np.ndarray:
    x = np.asarray(taus, dtype=float)
    return _noisy(g2_objective(model.as_vector(), x), noise, rng)


def synth_saturation(
    params: SaturationParams, powers: Sequence[float], noise: float, rng: np.random.Generator
) -> np.ndarray:
    x = np.asarray(powers, dtype=float)
    exact = saturation_objective(np.array([params.I_inf, params.P_sat, params.c_bg]), x)
    return _noisy(exact, noise, rng)


def synth_peaks(
    peaks: Sequence[GaussianPeak],
    positions: Sequence[float],
    offset: float,
    noise: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Gaussian peaks on a flat offset, e.g. a cavity-length scan."""
    x = np.asarray(positions, dtype=float)
    params = np.array([offset, *[v for p in peaks for v in (p.center, p.width, p.amplitude)]])
    return _noisy(gaussian_objective(params, x), noise, rng)
