"""
Measured emitter-cavity figures with propagated uncertainties.

Every operation accepts plain floats or Quantity values and returns a
Quantity. Rates are photons/s, linewidths GHz (emitter linewidths THz),
densities photons/(s GHz).
"""

import logging
import math
from collections.abc import Callable, Mapping
from dataclasses import dataclass
from typing import Any

from cav_common.constants import DEBYE_WALLER
from cav_common.errors import ConfigError, InvalidArgumentError
from cav_common.models import CouplingReport
from cav_common.quantity import Quantity, propagate, propagate_monte_carlo

logger = logging.getLogger(__name__)

GHZ_PER_THZ = 1e3

Number = float | Quantity


def as_quantity(value: Number, unit: str = "") -> Quantity:
    if isinstance(value, Quantity):
        return value
    return Quantity(float(value), 0.0, 0.0, unit)


@dataclass(frozen=True)
class EfficiencyChain:
    """Detected counts per emitted photon for one collection path."""

    eta: Quantity  # counts/photon

    def __post_init__(self) -> None:
        if not 0 < self.eta.value <= 1:
            raise InvalidArgumentError(f"collection efficiency must lie in (0, 1], got {self.eta.value}")

    @classmethod
    def from_dict(cls, data: Any) -> "EfficiencyChain":
        return cls(Quantity.from_dict(data))


def _eta(eta: "EfficiencyChain | Number") -> Quantity:
    if isinstance(eta, EfficiencyChain):
        return eta.eta
    quantity = as_quantity(eta)
    if quantity.value == 0:
        raise InvalidArgumentError("collection efficiency is zero")
    return EfficiencyChain(quantity).eta


def corrected_rate(measured: Number, eta: "EfficiencyChain | Number") -> Quantity:
    """Photon rate at the emitter: measured counts/s divided by η."""
    counts = as_quantity(measured, "counts/s")
    if counts.value < 0:
        raise InvalidArgumentError(f"measured rate must be >= 0, got {counts.value}")
    return propagate(
        lambda measured, eta: measured / eta,
        {"measured": counts, "eta": _eta(eta)},
        unit="photons/s",
    )


def _density(rate: float, fwhm: float) -> float:
    if fwhm <= 0:
        raise InvalidArgumentError(f"linewidth must be positive, got {fwhm}")
    return 2 * rate / (math.pi * fwhm)


def peak_spectral_density(rate_into_line: Number, fwhm: Number) -> Quantity:
    """Peak of a Lorentzian line carrying ``rate_into_line``: 2·rate/(π·FWHM)."""
    width = as_quantity(fwhm, "GHz")
    if width.value <= 0:
        raise InvalidArgumentError(f"linewidth must be positive, got {width.value}")
    return propagate(
        _density,
        {"rate": as_quantity(rate_into_line), "fwhm": width},
        unit="photons/(s GHz)",
    )


def _beta(cavity: float, free: float) -> float:
    total = cavity + free
    if total == 0:
        raise InvalidArgumentError("cavity and free-space rates are both zero")
    return cavity / total


def beta_measured(cavity_rate: Number, free_rate: Number) -> Quantity:
    """Funneling efficiency I_cav/(I_free + I_cav)."""
    cavity = as_quantity(cavity_rate)
    free = as_quantity(free_rate)
    if cavity.value < 0 or free.value < 0:
        raise InvalidArgumentError("rates must be >= 0")
    _beta(cavity.value, free.value)
    return propagate(_beta, {"cavity": cavity, "free": free})


def _purcell(gamma_star: float, kappa: float, xi: float, beta: float) -> float:
    return gamma_star * GHZ_PER_THZ / (xi * kappa) * beta


def purcell_from_beta(
    gamma_star: Number, kappa: Number, xi: Number, beta: Number
) -> Quantity:
    """
    Purcell factor of a broad emitter, (γ*/(ξκ))·β.

    Args:
        gamma_star: Emitter linewidth γ*/2π (THz)
        kappa: Cavity linewidth κ/2π (GHz)
        xi: Zero-phonon-line fraction
        beta: Funneling efficiency
    """
    inputs = {
        "gamma_star": as_quantity(gamma_star, "THz"),
        "kappa": as_quantity(kappa, "GHz"),
        "xi": as_quantity(xi),
        "beta": as_quantity(beta),
    }
    if inputs["gamma_star"].value <= 0 or inputs["kappa"].value <= 0:
        raise InvalidArgumentError("linewidths must be positive")
    if not 0 < inputs["xi"].value <= 1:
        raise InvalidArgumentError(f"xi must lie in (0, 1], got {inputs['xi'].value}")
    if inputs["beta"].value < 0:
        raise InvalidArgumentError(f"beta must be >= 0, got {inputs['beta'].value}")
    return propagate(_purcell, inputs)


def _lifetime_reduction(purcell: float, xi: float) -> float:
    return 1 + xi * purcell


def _zpl_fraction(purcell: float, xi: float) -> float:
    return xi * (1 + purcell) / (1 + xi * purcell)


def lifetime_and_zpl_projection(purcell: Number, xi: Number) -> tuple[Quantity, Quantity]:
    """
    Lifetime shortening 1 + ξF and enhanced ZPL fraction ξ(1+F)/(1+ξF).
    """
    inputs = {"purcell": as_quantity(purcell), "xi": as_quantity(xi)}
    if inputs["purcell"].value < 0:
        raise InvalidArgumentError(f"Purcell factor must be >= 0, got {inputs['purcell'].value}")
    if not 0 < inputs["xi"].value <= 1:
        raise InvalidArgumentError(f"xi must lie in (0, 1], got {inputs['xi'].value}")
    return propagate(_lifetime_reduction, inputs), propagate(_zpl_fraction, inputs)


def _ratio(observed: float, predicted: float) -> float:
    if predicted <= 0:
        raise InvalidArgumentError(f"predicted rate must be positive, got {predicted}")
    return observed / predicted


def quantum_efficiency(observed_total: Number, predicted_bright: Number) -> Quantity:
    """Observed emission over the bright-state rate the rate model predicts."""
    predicted = as_quantity(predicted_bright)
    _ratio(0.0, predicted.value)
    return propagate(_ratio, {"observed": as_quantity(observed_total), "predicted": predicted})


@dataclass(frozen=True)
class CouplingInputs:
    """Measured inputs of the coupling report."""

    free_counts: Quantity  # counts/s, saturated free-space count rate
    free_efficiency: Quantity  # counts/photon
    cavity_counts: Quantity  # counts/s, saturated cavity count rate
    cavity_efficiency: Quantity  # counts/photon
    emitter_linewidth: Quantity  # THz, γ*/2π
    cavity_linewidth: Quantity  # GHz, κ/2π
    predicted_bright_rate: Quantity  # photons/s from the rate model
    xi: Quantity = Quantity(DEBYE_WALLER)

    REQUIRED = (
        "free_counts",
        "free_efficiency",
        "cavity_counts",
        "cavity_efficiency",
        "emitter_linewidth_THz",
        "cavity_linewidth_GHz",
        "predicted_bright_rate",
    )

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], xi: float | None = None) -> "CouplingInputs":
        missing = [key for key in cls.REQUIRED if key not in data]
        if missing:
            raise ConfigError("invalid report inputs", missing=missing)
        try:
            return cls(
                free_counts=Quantity.from_dict(data["free_counts"]),
                free_efficiency=Quantity.from_dict(data["free_efficiency"]),
                cavity_counts=Quantity.from_dict(data["cavity_counts"]),
                cavity_efficiency=Quantity.from_dict(data["cavity_efficiency"]),
                emitter_linewidth=Quantity.from_dict(data["emitter_linewidth_THz"]),
                cavity_linewidth=Quantity.from_dict(data["cavity_linewidth_GHz"]),
                predicted_bright_rate=Quantity.from_dict(data["predicted_bright_rate"]),
                xi=Quantity.from_dict(data.get("xi", DEBYE_WALLER if xi is None else xi)),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"invalid report inputs: {e}")

    def as_inputs(self) -> dict[str, Quantity]:
        return {
            "free_counts": self.free_counts,
            "free_eta": self.free_efficiency,
            "cavity_counts": self.cavity_counts,
            "cavity_eta": self.cavity_efficiency,
            "gamma_star": self.emitter_linewidth,
            "kappa": self.cavity_linewidth,
            "predicted": self.predicted_bright_rate,
            "xi": self.xi,
        }


def _figures() -> dict[str, tuple[Callable[..., float], str]]:
    """Each report field as a function of the raw inputs, so shared inputs are counted once."""

    def free_rate(free_counts, free_eta, **_):
        return free_counts / free_eta

    def cavity_rate(cavity_counts, cavity_eta, **_):
        return cavity_counts / cavity_eta

    def beta(**kw):
        return _beta(cavity_rate(**kw), free_rate(**kw))

    def purcell(gamma_star, kappa, xi, **kw):
        return _purcell(gamma_star, kappa, xi, beta(**kw))

    def density_free(gamma_star, xi, **kw):
        return _density(free_rate(**kw) * xi, gamma_star * GHZ_PER_THZ)

    def density_cav(kappa, **kw):
        return _density(cavity_rate(**kw), kappa)

    def enhancement(gamma_star, kappa, xi, **kw):
        return density_cav(kappa=kappa, **kw) / density_free(gamma_star=gamma_star, xi=xi, **kw)

    def efficiency(predicted, **kw):
        return _ratio(free_rate(**kw), predicted)

    def lifetime(gamma_star, kappa, xi, **kw):
        return _lifetime_reduction(purcell(gamma_star, kappa, xi, **kw), xi)

    def zpl(gamma_star, kappa, xi, **kw):
        return _zpl_fraction(purcell(gamma_star, kappa, xi, **kw), xi)

    return {
        "free_rate": (free_rate, "photons/s"),
        "cavity_rate": (cavity_rate, "photons/s"),
        "beta": (beta, ""),
        "purcell": (purcell, ""),
        "spectral_density_free": (density_free, "photons/(s GHz)"),
        "spectral_density_cav": (density_cav, "photons/(s GHz)"),
        "enhancement_ratio": (enhancement, ""),
        "quantum_efficiency": (efficiency, ""),
        "lifetime_reduction": (lifetime, ""),
        "zpl_fraction_enhanced": (zpl, ""),
    }


def build_report(
    inputs: CouplingInputs,
    monte_carlo: bool = False,
    samples: int = 10_000,
    seed: int = 0,
) -> CouplingReport:
    """
    Derive every report figure from the measured inputs.

    Args:
        inputs: Measured rates, efficiencies and linewidths
        monte_carlo: Use split-normal sampling instead of deterministic propagation
        samples: Monte Carlo sample count
        seed: Monte Carlo seed

    Returns:
        CouplingReport with one Quantity per figure
    """
    EfficiencyChain(inputs.free_efficiency)
    EfficiencyChain(inputs.cavity_efficiency)
    raw = inputs.as_inputs()
    fields: dict[str, Quantity] = {}
    for name, (func, unit) in _figures().items():
        if monte_carlo:
            fields[name] = propagate_monte_carlo(func, raw, unit, samples=samples, seed=seed)
        else:
            fields[name] = propagate(func, raw, unit)
    logger.info(
        f"Coupling report: beta={fields['beta'].value:.4g}, "
        f"F_p={fields['purcell'].value:.4g}, QE={fields['quantum_efficiency'].value:.3g}"
    )
    return CouplingReport(**fields)
