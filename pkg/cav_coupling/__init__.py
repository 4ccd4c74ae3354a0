"""
cavtool coupling-analysis module.

Efficiency-corrected rates, funneling efficiency (measured and simulated),
peak spectral densities, Purcell factor and its lifetime/ZPL projections,
quantum efficiency, and the combined coupling report.
"""

from .analysis import (
    CouplingInputs,
    EfficiencyChain,
    as_quantity,
    beta_measured,
    build_report,
    corrected_rate,
    lifetime_and_zpl_projection,
    peak_spectral_density,
    purcell_from_beta,
    quantum_efficiency,
)
from .simulation import (
    BetaScan,
    EmitterProperties,
    beta_depth_scan,
    beta_simulated,
    coupling_strength,
    funneling_rate,
)

__all__ = [
    "BetaScan",
    "CouplingInputs",
    "EfficiencyChain",
    "EmitterProperties",
    "as_quantity",
    "beta_depth_scan",
    "beta_measured",
    "beta_simulated",
    "build_report",
    "corrected_rate",
    "coupling_strength",
    "funneling_rate",
    "lifetime_and_zpl_projection",
    "peak_spectral_density",
    "purcell_from_beta",
    "quantum_efficiency",
]
