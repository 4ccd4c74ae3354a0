"""Count rate against pump power."""

import numpy as np

from cav_common.errors import InvalidArgumentError
from cav_common.models import SaturationParams


def saturation_model(power, params: SaturationParams):
    """I(P) = I_inf·P/(P + P_sat) + c_bg·P for P in mW, in counts/s."""
    p = np.asarray(power, dtype=float)
    if np.any(p < 0):
        raise InvalidArgumentError("pump power must be >= 0")
    value = params.I_inf * p / (p + params.P_sat) + params.c_bg * p
    return float(value) if value.ndim == 0 else value


def saturation_power_fraction(power: float, params: SaturationParams) -> float:
    """Fraction P/(P + P_sat) of the saturated emitter signal reached at ``power``."""
    if power < 0:
        raise InvalidArgumentError(f"pump power must be >= 0, got {power}")
    return power / (power + params.P_sat)
