"""
Values with asymmetric uncertainty and the propagation rules used by the
coupling analysis.

Two propagation paths are provided:

- ``propagate``: deterministic. Inputs with symmetric intervals contribute
  through a central-difference first-order derivative; inputs with
  asymmetric intervals are evaluated at their interval endpoints. The
  upward and downward excursions of every input are summed in quadrature
  into ``sigma_plus`` / ``sigma_minus``.
- ``propagate_monte_carlo``: seeded sampling from split-normal
  distributions, used to validate the deterministic path.
"""

import math
from collections.abc import Callable, Mapping
from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import InvalidArgumentError

DERIVATIVE_STEP = 1e-6
MONTE_CARLO_SAMPLES = 10_000


@dataclass(frozen=True)
class Quantity:
    """A unit-tagged value with (possibly asymmetric) one-sigma errors."""

    value: float
    sigma_plus: float = 0.0
    sigma_minus: float = 0.0
    unit: str = ""

    def __post_init__(self) -> None:
        if self.sigma_plus < 0 or self.sigma_minus < 0:
            raise InvalidArgumentError(
                f"uncertainties must be non-negative, got +{self.sigma_plus}/-{self.sigma_minus}"
            )

    @classmethod
    def symmetric(cls, value: float, sigma: float = 0.0, unit: str = "") -> "Quantity":
        return cls(float(value), float(sigma), float(sigma), unit)

    @property
    def is_symmetric(self) -> bool:
        return math.isclose(self.sigma_plus, self.sigma_minus, rel_tol=1e-12, abs_tol=0.0)

    @property
    def upper(self) -> float:
        return self.value + self.sigma_plus

    @property
    def lower(self) -> float:
        return self.value - self.sigma_minus

    def scaled(self, factor: float, unit: str | None = None) -> "Quantity":
        """Multiply by a positive exact factor (unit conversions)."""
        if factor <= 0:
            raise InvalidArgumentError(f"scale factor must be positive, got {factor}")
        return Quantity(
            self.value * factor,
            self.sigma_plus * factor,
            self.sigma_minus * factor,
            self.unit if unit is None else unit,
        )

    def to_dict(self) -> dict[str, Any]:
        """Convert to the report format."""
        return {
            "value": self.value,
            "sigma_plus": self.sigma_plus,
            "sigma_minus": self.sigma_minus,
            "unit": self.unit,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any] | float | int) -> "Quantity":
        """
        Parse a config entry.

        Accepts a bare number, ``{value, sigma}``, or
        ``{value, sigma_plus, sigma_minus}``; ``unit`` is optional.
        """
        if isinstance(data, (int, float)):
            return cls(float(data))
        value = float(data["value"])
        unit = str(data.get("unit", ""))
        if "sigma" in data:
            return cls.symmetric(value, float(data["sigma"]), unit)
        return cls(
            value,
            float(data.get("sigma_plus", 0.0)),
            float(data.get("sigma_minus", 0.0)),
            unit,
        )


def _excursions(
    func: Callable[..., float],
    values: dict[str, float],
    quantity: Quantity,
    name: str,
    center: float,
) -> tuple[float, float]:
    """Upward and downward change of func caused by one input."""
    if quantity.sigma_plus == 0 and quantity.sigma_minus == 0:
        return 0.0, 0.0

    def evaluate(x: float) -> float:
        shifted = dict(values)
        shifted[name] = x
        return float(func(**shifted))

    if quantity.is_symmetric:
        h = DERIVATIVE_STEP * max(abs(quantity.value), quantity.sigma_plus)
        derivative = (evaluate(quantity.value + h) - evaluate(quantity.value - h)) / (2 * h)
        delta = abs(derivative) * quantity.sigma_plus
        return delta, delta

    up = evaluate(quantity.upper) - center
    down = evaluate(quantity.lower) - center
    return max(up, down, 0.0), max(-up, -down, 0.0)


def propagate(
    func: Callable[..., float],
    inputs: Mapping[str, Quantity],
    unit: str = "",
) -> Quantity:
    """
    Evaluate ``func(**values)`` and propagate the input uncertainties.

    Args:
        func: Function of keyword arguments named like ``inputs``
        inputs: Input quantities by argument name
        unit: Unit of the result

    Returns:
        Result quantity; its value is func at the central input values
    """
    names = sorted(inputs)
    values = {name: inputs[name].value for name in names}
    center = float(func(**values))
    plus_sq = 0.0
    minus_sq = 0.0
    for name in names:
        up, down = _excursions(func, values, inputs[name], name, center)
        plus_sq += up * up
        minus_sq += down * down
    return Quantity(center, math.sqrt(plus_sq), math.sqrt(minus_sq), unit)


def split_normal_samples(
    quantity: Quantity, size: int, rng: np.random.Generator
) -> np.ndarray:
    """Draw from a two-piece normal with the quantity's one-sigma widths."""
    z = rng.standard_normal(size)
    return quantity.value + np.where(z >= 0, z * quantity.sigma_plus, z * quantity.sigma_minus)


def propagate_monte_carlo(
    func: Callable[..., float],
    inputs: Mapping[str, Quantity],
    unit: str = "",
    samples: int = MONTE_CARLO_SAMPLES,
    seed: int = 0,
) -> Quantity:
    """
    Monte Carlo counterpart of ``propagate``.

    The central value is func at the central inputs; the errors are the
    distances to the 15.87th and 84.13th percentiles of the sampled outputs.
    Inputs are sampled in sorted-name order so results depend only on seed.

    Raises:
        InvalidArgumentError: If samples < 2, or no sample gives a finite output
    """
    if samples < 2:
        raise InvalidArgumentError(f"need at least 2 samples, got {samples}")
    rng = np.random.default_rng(seed)
    names = sorted(inputs)
    drawn = {name: split_normal_samples(inputs[name], samples, rng) for name in names}
    center = float(func(**{name: inputs[name].value for name in names}))
    outputs = np.empty(samples)
    for i in range(samples):
        try:
            outputs[i] = func(**{name: drawn[name][i] for name in names})
        except (InvalidArgumentError, ZeroDivisionError):
            outputs[i] = np.nan  # sample fell outside the function domain
    outputs = outputs[np.isfinite(outputs)]
    if outputs.size == 0:
        raise InvalidArgumentError(
            f"no Monte Carlo sample of {', '.join(names)} lies inside the function domain"
        )
    low, high = np.percentile(outputs, [15.865525, 84.134475])
    return Quantity(center, max(high - center, 0.0), max(center - low, 0.0), unit)
