"""
Ready-made fits: photon autocorrelation, saturation curve, Gaussian peaks
and the power-dependent three-level rate model.
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy.signal import find_peaks, medfilt

from cav_common.errors import DegenerateRatesError, InvalidArgumentError
from cav_common.models import G2Model, SaturationParams, ThreeLevelRates
from cav_emitter import PowerDependentRates, g2_intrinsic, rates_to_g2_params

from .engine import FitProblem, FitResult, fit

logger = logging.getLogger(__name__)

G2_NAMES = ("sigma", "a", "tau1", "tau2")
SATURATION_NAMES = ("I_inf", "P_sat", "c_bg")
RATE_NAMES = ("alpha", "shelving", "deshelving", "shelving_slope", "deshelving_slope")
SMOOTHING_KERNEL = 5
PROMINENCE_FRACTION = 0.05
SIGMA_FLOOR = 1e-6
TIME_BOUNDS = (1e-6, 1e6)  # ns


def g2_objective(params: np.ndarray, taus: np.ndarray) -> np.ndarray:
    sigma, a, tau1, tau2 = params
    return sigma**2 * g2_intrinsic(taus, a, tau1, tau2) + 1 - sigma**2


def saturation_objective(params: np.ndarray, powers: np.ndarray) -> np.ndarray:
    I_inf, P_sat, c_bg = params
    return I_inf * powers / (powers + P_sat) + c_bg * powers


def saturation_jacobian(params: np.ndarray, powers: np.ndarray) -> np.ndarray:
    I_inf, P_sat, _ = params
    denominator = powers + P_sat
    return np.column_stack(
        [powers / denominator, -I_inf * powers / denominator**2, powers]
    )


def gaussian_objective(params: np.ndarray, positions: np.ndarray) -> np.ndarray:
    """Offset plus Σ amplitude·exp(-(x - center)²/(2·width²)); params (offset, c, w, A, ...)."""
    result = np.full(positions.shape, params[0], dtype=float)
    for center, width, amplitude in params[1:].reshape(-1, 3):
        result = result + amplitude * np.exp(-((positions - center) ** 2) / (2 * width**2))
    return result


def _columns(data: Sequence[float], name: str) -> np.ndarray:
    array = np.asarray(data, dtype=float)
    if array.ndim != 1 or array.size == 0:
        raise InvalidArgumentError(f"{name} must be a non-empty 1-D sequence")
    return array


def _g2_guess(taus: np.ndarray, values: np.ndarray) -> np.ndarray:
    order = np.argsort(np.abs(taus))
    near = values[order[: max(1, len(order) // 50)]]
    sigma = math.sqrt(min(max(1 - float(np.min(near)), SIGMA_FLOOR**2), 1.0))
    excess = float(np.max(values)) - 1
    a = max(excess, 0.0) / sigma**2
    span = float(np.max(np.abs(taus)))
    return np.array([sigma, a, span / 100, span / 10])


def fit_g2(
    taus: Sequence[float],
    values: Sequence[float],
    weights: Sequence[float] | None = None,
    initial: G2Model | None = None,
    power_label: str = "",
) -> tuple[G2Model, FitResult]:
    """
    Fit the background-diluted autocorrelation to measured g²(τ).

    Args:
        taus: Delays (ns)
        values: Normalized coincidences
        weights: Per-point weights, default 1
        initial: Start point, default a guess from the data
        power_label: Tag recorded in the result (e.g. the pump power)

    Returns:
        (G2Model, FitResult); σ is bounded to [1e-6, 1]
    """
    x = _columns(taus, "taus")
    y = _columns(values, "g2 values")
    start = _g2_guess(x, y) if initial is None else initial.as_vector()
    lower = np.array([SIGMA_FLOOR, 0.0, TIME_BOUNDS[0], TIME_BOUNDS[0]])
    upper = np.array([1.0, 1e3, TIME_BOUNDS[1], TIME_BOUNDS[1]])
    start = np.clip(start, lower, upper)
    problem = FitProblem(
        g2_objective, x, y, start, lower, upper, weights=weights, names=G2_NAMES
    )
    result = fit(problem, label=power_label)

    sigma, a, tau1, tau2 = result.params
    span = float(np.max(np.abs(x)))
    spacing = float(np.min(np.diff(np.unique(np.abs(x))))) if np.unique(np.abs(x)).size > 1 else span
    if span < 3 * max(tau1, tau2) or spacing > min(tau1, tau2):
        note = f"delay grid (span {span:.3g} ns, step {spacing:.3g} ns) does not resolve both timescales"
        result.warnings.append(note)
        logger.warning(note)
    return G2Model(float(sigma), float(a), float(tau1), float(tau2)), result


def fit_saturation(
    powers: Sequence[float],
    counts: Sequence[float],
    weights: Sequence[float] | None = None,
    initial: SaturationParams | None = None,
    fit_background: bool = True,
) -> tuple[SaturationParams, FitResult]:
    """
    Fit I(P) = I_inf·P/(P + P_sat) + c_bg·P.

    Args:
        powers: Pump powers, any unit (P_sat comes out in the same unit)
        counts: Count rates (counts/s)
        weights: Per-point weights, default 1
        initial: Start point, default from the data
        fit_background: False pins c_bg to 0

    Raises:
        InvalidArgumentError: With fewer than 4 distinct powers
    """
    x = _columns(powers, "powers")
    y = _columns(counts, "counts")
    if np.unique(x).size < 4:
        raise InvalidArgumentError("saturation fit needs at least 4 distinct powers")
    if np.any(x < 0):
        raise InvalidArgumentError("pump powers must be >= 0")
    if initial is None:
        positive = x[x > 0]
        start = np.array([1.2 * float(np.max(y)), float(np.median(positive)) if positive.size else 1.0, 0.0])
    else:
        start = np.array([initial.I_inf, initial.P_sat, initial.c_bg])
    if not fit_background:
        start[2] = 0.0
    upper_bg = np.inf if fit_background else 0.0
    problem = FitProblem(
        saturation_objective,
        x,
        y,
        start,
        lower=np.array([0.0, 1e-300, 0.0]),
        upper=np.array([np.inf, np.inf, upper_bg]),
        weights=weights,
        names=SATURATION_NAMES,
        jacobian=saturation_jacobian,
    )
    result = fit(problem, label="saturation")
    I_inf, P_sat, c_bg = (float(v) for v in result.params)
    return SaturationParams(I_inf, P_sat, c_bg), result


@dataclass(frozen=True)
class GaussianPeak:
    center: float
    width: float  # standard deviation
    amplitude: float  # height above the offset

    @property
    def fwhm(self) -> float:
        return 2 * math.sqrt(2 * math.log(2)) * self.width

    def to_dict(self) -> dict[str, Any]:
        return {"center": self.center, "width": self.width, "amplitude": self.amplitude}


def _peak_width(x: np.ndarray, smoothed: np.ndarray, index: int, offset: float) -> float:
    """σ from the half-maximum crossings around one peak."""
    half = offset + (smoothed[index] - offset) / 2
    left = index
    while left > 0 and smoothed[left] > half:
        left -= 1
    right = index
    while right < smoothed.size - 1 and smoothed[right] > half:
        right += 1
    return max((x[right] - x[left]) / (2 * math.sqrt(2 * math.log(2))), float(np.min(np.diff(x))))


def _peak_guess(x: np.ndarray, y: np.ndarray, n_peaks: int) -> np.ndarray:
    """Offset plus (center, width, amplitude) at the largest smoothed maxima."""
    kernel = SMOOTHING_KERNEL if y.size >= SMOOTHING_KERNEL else 1
    smoothed = medfilt(y, kernel)
    offset = float(np.min(smoothed))
    # The prominence floor only rejects noise; candidates rank by height.
    indices, _ = find_peaks(smoothed, prominence=PROMINENCE_FRACTION * float(np.ptp(smoothed)))
    if indices.size == 0:
        indices = np.array([int(np.argmax(smoothed))])
    strongest = indices[np.argsort(smoothed[indices], kind="stable")[::-1]][:n_peaks]
    guesses = []
    for index in sorted(strongest):
        width = _peak_width(x, smoothed, int(index), offset)
        guesses.append((float(x[index]), width, float(smoothed[index]) - offset))
    while len(guesses) < n_peaks:
        center, width, amplitude = guesses[len(guesses) % len(strongest)]
        guesses.append((center + width, width, amplitude / 2))
    return np.array([offset, *[value for guess in guesses for value in guess]])


def fit_gaussian_peaks(
    positions: Sequence[float],
    counts: Sequence[float],
    n_peaks: int,
    weights: Sequence[float] | None = None,
) -> tuple[list[GaussianPeak], FitResult]:
    """
    Fit ``n_peaks`` Gaussians on a common offset to a cavity-length scan.

    Initial centers sit at the largest local maxima after a 5-point median
    filter. Peaks are returned sorted by center; amplitudes are heights
    above the fitted offset.

    Raises:
        InvalidArgumentError: If n_peaks < 1 or the scan is empty
    """
    if n_peaks < 1:
        raise InvalidArgumentError(f"n_peaks must be >= 1, got {n_peaks}")
    x = _columns(positions, "positions")
    y = _columns(counts, "counts")
    if x.size != y.size:
        raise InvalidArgumentError("positions and counts differ in length")
    order = np.argsort(x)
    x, y = x[order], y[order]
    if weights is not None:
        weights = np.asarray(weights, dtype=float)[order]
    names = ("offset", *[f"{p}_{i}" for i in range(n_peaks) for p in ("center", "width", "amplitude")])

    if np.ptp(y) == 0 or np.unique(x).size < 3 * n_peaks + 1:
        message = "scan has no peak structure to fit"
        logger.warning(message)
        size = 1 + 3 * n_peaks
        return [], FitResult(
            params=np.full(size, np.nan),
            covariance=np.full((size, size), np.nan),
            reduced_chi_squared=math.nan,
            converged=False,
            iterations=0,
            names=names,
            warnings=[message],
            message=message,
            label="peaks",
        )

    start = _peak_guess(x, y, n_peaks)
    span = float(x[-1] - x[0])
    step = float(np.min(np.diff(np.unique(x))))
    lower = [-np.inf] + [x[0], step / 10, 0.0] * n_peaks
    upper = [np.inf] + [x[-1], span, np.inf] * n_peaks
    start = np.clip(start, lower, upper)
    problem = FitProblem(
        gaussian_objective, x, y, start, np.array(lower), np.array(upper), weights=weights, names=names
    )
    result = fit(problem, label="peaks")
    peaks = sorted(
        (GaussianPeak(float(c), float(w), float(a)) for c, w, a in result.params[1:].reshape(-1, 3)),
        key=lambda peak: peak.center,
    )
    return peaks, result


def _rates_objective(k21: float, powers: np.ndarray):
    """Concatenated (a, τ1, τ2) per power for a PowerDependentRates parameter vector."""

    def model(params: np.ndarray, _: np.ndarray) -> np.ndarray:
        alpha, shelving, deshelving, shelving_slope, deshelving_slope = params
        values = np.empty((3, powers.size))
        for i, power in enumerate(powers):
            try:
                rates = ThreeLevelRates(
                    k12=alpha * power,
                    k21=k21,
                    k23=shelving + shelving_slope * power,
                    k31=deshelving + deshelving_slope * power,
                )
                values[:, i] = rates_to_g2_params(rates)
            except (DegenerateRatesError, InvalidArgumentError):
                values[:, i] = np.nan
        return values.ravel()

    return model


def fit_rate_model(
    powers: Sequence[float],
    g2_params: Sequence[G2Model],
    k21: float,
    initial: PowerDependentRates,
    fit_shelving_slope: bool = True,
    fit_deshelving_slope: bool = False,
) -> tuple[PowerDependentRates, FitResult]:
    """
    Fit power-dependent rates to per-power autocorrelation parameters.

    Residuals are relative: every a, τ1 and τ2 is weighted by 1/value².

    Args:
        powers: Pump powers (mW), one per g² fit
        g2_params: Fitted autocorrelation parameters per power
        k21: Radiative rate (1/s), held fixed
        initial: Start point; its k21 is ignored
        fit_shelving_slope: Let k23 grow with power
        fit_deshelving_slope: Let k31 grow with power
    """
    x = _columns(powers, "powers")
    if len(g2_params) != x.size:
        raise InvalidArgumentError("need one g2 parameter set per power")
    if x.size < 2:
        raise InvalidArgumentError("rate fit needs at least 2 powers")
    y = np.concatenate(
        [
            [model.a for model in g2_params],
            [model.tau1 for model in g2_params],
            [model.tau2 for model in g2_params],
        ]
    )
    scale = np.maximum(np.abs(y), 1e-12)
    start = np.array(
        [
            initial.alpha,
            initial.shelving,
            initial.deshelving,
            initial.shelving_slope if fit_shelving_slope else 0.0,
            initial.deshelving_slope if fit_deshelving_slope else 0.0,
        ]
    )
    upper = np.array(
        [np.inf, np.inf, np.inf, np.inf if fit_shelving_slope else 0.0, np.inf if fit_deshelving_slope else 0.0]
    )
    problem = FitProblem(
        _rates_objective(k21, x),
        np.arange(y.size, dtype=float),
        y,
        start,
        lower=np.zeros(5),
        upper=upper,
        weights=1 / scale**2,
        names=RATE_NAMES,
    )
    result = fit(problem, label="rates")
    alpha, shelving, deshelving, shelving_slope, deshelving_slope = (float(v) for v in result.params)
    return PowerDependentRates(alpha, k21, shelving, deshelving, shelving_slope, deshelving_slope), result
