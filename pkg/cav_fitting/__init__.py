"""
cavtool fitting module.

Levenberg-Marquardt least squares with bounds, fixed parameters and
covariance estimates, plus the autocorrelation, saturation, Gaussian-peak
and rate-model fits built on it.
"""

from .engine import (
    FitProblem,
    FitResult,
    fit,
    gradient_norm,
    jacobian_step,
    numerical_jacobian,
    poisson_weights,
)
from .models import (
    GaussianPeak,
    fit_g2,
    fit_gaussian_peaks,
    fit_rate_model,
    fit_saturation,
    g2_objective,
    gaussian_objective,
    saturation_jacobian,
    saturation_objective,
)
from .synthetic import synth_g2, synth_peaks, synth_saturation

__all__ = [
    "FitProblem",
    "FitResult",
    "GaussianPeak",
    "fit",
    "fit_g2",
    "fit_gaussian_peaks",
    "fit_rate_model",
    "fit_saturation",
    "g2_objective",
    "gaussian_objective",
    "gradient_norm",
    "jacobian_step",
    "numerical_jacobian",
    "poisson_weights",
    "saturation_jacobian",
    "saturation_objective",
    "synth_g2",
    "synth_peaks",
    "synth_saturation",
]
