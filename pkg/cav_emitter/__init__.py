"""
cavtool emitter-dynamics module.

Three-level (ground, excited, dark) population model: autocorrelation with
and without background, rate-to-g² mapping, steady state against pump
power and the saturation curve.
"""

from .dynamics import (
    conditional_g2,
    default_step,
    emission_rate,
    evolve,
    g2_intrinsic,
    g2_measured,
    g2_params_model,
    integrate_populations,
    rate_matrix,
    rates_to_g2_params,
    sigma_from_g2_zero,
    steady_state,
)
from .power import (
    PowerDependentRates,
    emission_vs_power,
    infinite_power_limit,
    populations_vs_power,
    rates_for_dark_limit,
    saturated_emission_rate,
)
from .saturation import saturation_model, saturation_power_fraction

__all__ = [
    "PowerDependentRates",
    "conditional_g2",
    "default_step",
    "emission_rate",
    "emission_vs_power",
    "evolve",
    "g2_intrinsic",
    "g2_measured",
    "g2_params_model",
    "infinite_power_limit",
    "integrate_populations",
    "populations_vs_power",
    "rate_matrix",
    "rates_for_dark_limit",
    "rates_to_g2_params",
    "saturated_emission_rate",
    "saturation_model",
    "saturation_power_fraction",
    "sigma_from_g2_zero",
    "steady_state",
]
