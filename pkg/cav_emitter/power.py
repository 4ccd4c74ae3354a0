"""
Pump-power dependence of the three-level rates.
"""

from dataclasses import dataclass
from typing import Any

import numpy as np
from numpy.polynomial import polynomial

from cav_common.errors import ConfigError, InvalidArgumentError
from cav_common.models import PopulationState, ThreeLevelRates

from .dynamics import emission_rate, steady_state


@dataclass(frozen=True)
class PowerDependentRates:
    """
    Rates as functions of pump power P (mW).

    k12 = α·P, k21 fixed, k23 = b0 + b1·P, k31 = c0 + c1·P.
    """

    alpha: float  # 1/(s mW)
    k21: float  # 1/s
    shelving: float  # b0, 1/s
    deshelving: float  # c0, 1/s
    shelving_slope: float = 0.0  # b1, 1/(s mW)
    deshelving_slope: float = 0.0  # c1, 1/(s mW)

    def __post_init__(self) -> None:
        for name in ("alpha", "k21", "shelving", "deshelving", "shelving_slope", "deshelving_slope"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise InvalidArgumentError(f"{name} must be finite and >= 0, got {value}")
        if self.k21 <= 0:
            raise InvalidArgumentError("k21 must be positive")

    @property
    def power_dependent(self) -> list[str]:
        """Names of the rates that change with pump power."""
        names = ["k12"]
        if self.shelving_slope > 0:
            names.append("k23")
        if self.deshelving_slope > 0:
            names.append("k31")
        return names

    def at(self, power: float) -> ThreeLevelRates:
        if power < 0:
            raise InvalidArgumentError(f"pump power must be >= 0, got {power} mW")
        return ThreeLevelRates(
            k12=self.alpha * power,
            k21=self.k21,
            k23=self.shelving + self.shelving_slope * power,
            k31=self.deshelving + self.deshelving_slope * power,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "alpha": self.alpha,
            "k21": self.k21,
            "shelving": self.shelving,
            "deshelving": self.deshelving,
            "shelving_slope": self.shelving_slope,
            "deshelving_slope": self.deshelving_slope,
            "power_dependent": self.power_dependent,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "PowerDependentRates":
        missing = [key for key in ("alpha", "k21", "shelving", "deshelving") if key not in data]
        if missing:
            raise ConfigError("invalid power-dependent rates", missing=missing)
        return cls(
            alpha=float(data["alpha"]),
            k21=float(data["k21"]),
            shelving=float(data["shelving"]),
            deshelving=float(data["deshelving"]),
            shelving_slope=float(data.get("shelving_slope", 0.0)),
            deshelving_slope=float(data.get("deshelving_slope", 0.0)),
        )


def populations_vs_power(model: PowerDependentRates, powers) -> np.ndarray:
    """Steady-state populations, one (ground, excited, dark) row per power."""
    return np.array([steady_state(model.at(float(p))).as_vector() for p in np.asarray(powers)])


def emission_vs_power(model: PowerDependentRates, powers, quantum_efficiency: float = 1.0) -> np.ndarray:
    return np.array(
        [emission_rate(model.at(float(p)), quantum_efficiency) for p in np.asarray(powers)]
    )


def infinite_power_limit(model: PowerDependentRates) -> PopulationState:
    """
    Steady state as P → ∞.

    The closed-form steady-state weights are polynomials in P; the limit is
    the ratio of their coefficients at the highest common degree.
    """
    k12 = np.array([0.0, model.alpha])
    k21 = np.array([model.k21])
    k23 = np.array([model.shelving, model.shelving_slope])
    k31 = np.array([model.deshelving, model.deshelving_slope])
    weights = [
        polynomial.polymul(polynomial.polyadd(k21, k23), k31),
        polynomial.polymul(k12, k31),
        polynomial.polymul(k12, k23),
    ]
    degree = max(
        (int(np.flatnonzero(w)[-1]) for w in weights if np.any(w)), default=-1
    )
    if degree < 0 or model.alpha == 0:
        return PopulationState(1.0, 0.0, 0.0)
    leading = np.array([w[degree] if w.size > degree else 0.0 for w in weights])
    p = leading / leading.sum()
    return PopulationState(float(p[0]), float(p[1]), float(1 - p[0] - p[1]))


def saturated_emission_rate(model: PowerDependentRates, quantum_efficiency: float = 1.0) -> float:
    """Emission rate (1/s) in the infinite-power limit."""
    if not 0 < quantum_efficiency <= 1:
        raise InvalidArgumentError(
            f"quantum efficiency must lie in (0, 1], got {quantum_efficiency}"
        )
    return infinite_power_limit(model).p_excited * model.k21 * quantum_efficiency


def rates_for_dark_limit(
    k21: float,
    alpha: float,
    shelving: float,
    dark_fraction: float,
    shelving_slope: float = 0.0,
) -> PowerDependentRates:
    """
    Rates whose infinite-power dark population equals ``dark_fraction``.

    Deshelving is set to shelving·(1-f)/f; with power-dependent shelving the
    deshelving slope is chosen so the affine limit α·b1/(α·b1 + α·c1 + b1·c1)
    also equals f.
    """
    if not 0 < dark_fraction < 1:
        raise InvalidArgumentError(f"dark fraction must lie in (0, 1), got {dark_fraction}")
    if shelving <= 0 and shelving_slope <= 0:
        raise InvalidArgumentError("a dark population needs non-zero shelving")
    ratio = (1 - dark_fraction) / dark_fraction
    slope = 0.0
    if shelving_slope > 0:
        slope = alpha * shelving_slope * ratio / (alpha + shelving_slope)
    return PowerDependentRates(
        alpha=alpha,
        k21=k21,
        shelving=shelving,
        deshelving=shelving * ratio,
        shelving_slope=shelving_slope,
        deshelving_slope=slope,
    )
