"""
Three-level emitter: rate matrix, steady state and photon autocorrelation.

Levels are ground (1), excited (2) and dark (3). Populations evolve as
dp/dt = G p with the generator from rate_matrix. Rates are in 1/s, delays
in ns.
"""

import logging
import math

import numpy as np

from cav_common.errors import DegenerateRatesError, InvalidArgumentError
from cav_common.models import G2Model, PopulationState, ThreeLevelRates

logger = logging.getLogger(__name__)

NS = 1e-9
DEGENERACY_TOL = 1e-9
RK4_STEPS_PER_TAU = 100


def rate_matrix(rates: ThreeLevelRates) -> np.ndarray:
    """Generator G of the master rate equations; columns sum to zero."""
    k12, k21, k23, k31 = rates.k12, rates.k21, rates.k23, rates.k31
    return np.array(
        [
            [-k12, k21, k31],
            [k12, -(k21 + k23), 0.0],
            [0.0, k23, -k31],
        ]
    )


def g2_intrinsic(tau, a: float, tau1: float, tau2: float):
    """
    Background-free autocorrelation 1 - (1+a)e^{-|τ|/τ1} + a·e^{-|τ|/τ2}.

    Args:
        tau: Delay(s) in ns, scalar or array
        a: Bunching amplitude
        tau1: Antibunching time (ns)
        tau2: Bunching time (ns)
    """
    t = np.abs(np.asarray(tau, dtype=float))
    # expm1 keeps g²(0) exactly 0
    value = -(1 + a) * np.expm1(-t / tau1) + a * np.expm1(-t / tau2)
    return float(value) if value.ndim == 0 else value


def g2_measured(tau, model: G2Model):
    """Autocorrelation diluted by Poissonian background: σ²·g² + 1 - σ²."""
    intrinsic = g2_intrinsic(tau, model.a, model.tau1, model.tau2)
    return intrinsic * model.sigma**2 + 1 - model.sigma**2


def sigma_from_g2_zero(g2_zero: float) -> float:
    """Signal fraction σ implied by a measured g²(0) = 1 - σ²."""
    if not 0 <= g2_zero < 1:
        raise InvalidArgumentError(f"g2(0) must lie in [0, 1), got {g2_zero}")
    return math.sqrt(1 - g2_zero)


def _trace_and_product(rates: ThreeLevelRates) -> tuple[float, float]:
    """Sum and product of the two non-zero decay rates of G."""
    k12, k21, k23, k31 = rates.k12, rates.k21, rates.k23, rates.k31
    total = k12 + k21 + k23 + k31
    product = k12 * k23 + k12 * k31 + k21 * k31 + k23 * k31
    return total, product


def rates_to_g2_params(rates: ThreeLevelRates) -> tuple[float, float, float]:
    """
    Map rates onto (a, τ1, τ2) of the autocorrelation.

    1/τ1 and 1/τ2 are the non-zero eigenvalue magnitudes of the rate
    matrix (τ1 the shorter). The amplitude follows from the excited-state
    population after a detection: p2(0) = 0 and dp2/dt(0) = k12.

    Returns:
        (a, tau1_ns, tau2_ns). ``a`` can be negative for rates where
        deshelving is faster than the bright-state dynamics.

    Raises:
        InvalidArgumentError: If k12 = 0, or the dark state never empties
        DegenerateRatesError: If the two timescales coincide
    """
    if rates.k12 <= 0:
        raise InvalidArgumentError("autocorrelation needs a non-zero pump rate k12")
    if rates.k23 == 0:
        bright = rates.k12 + rates.k21
        tau2 = 1 / rates.k31 / NS if rates.k31 > 0 else math.inf
        return 0.0, 1 / bright / NS, tau2
    if rates.k31 <= 0:
        raise InvalidArgumentError("k31 must be positive when the dark state is populated")

    total, product = _trace_and_product(rates)
    spread = math.sqrt(max(total * total - 4 * product, 0.0))
    fast = (total + spread) / 2
    if spread <= DEGENERACY_TOL * fast:
        raise DegenerateRatesError()
    slow = product / fast
    a = (product / rates.k31 - fast) / spread
    return a, 1 / fast / NS, 1 / slow / NS


def g2_params_model(rates: ThreeLevelRates, sigma: float = 1.0) -> G2Model:
    """rates_to_g2_params as a G2Model; rejects rates with negative bunching."""
    a, tau1, tau2 = rates_to_g2_params(rates)
    return G2Model(sigma=sigma, a=a, tau1=tau1, tau2=tau2)


def steady_state(rates: ThreeLevelRates) -> PopulationState:
    """
    Normalized null vector of the rate matrix.

    Closed form ((k21+k23)k31, k12k31, k12k23)/Σ; the ground state exactly
    when the pump is off.
    """
    if rates.k12 == 0:
        return PopulationState(1.0, 0.0, 0.0)
    k12, k21, k23, k31 = rates.k12, rates.k21, rates.k23, rates.k31
    if k23 == 0 and k31 == 0:
        weights = np.array([k21, k12, 0.0])
    else:
        weights = np.array([(k21 + k23) * k31, k12 * k31, k12 * k23])
    p = weights / weights.sum()
    return PopulationState(float(p[0]), float(p[1]), float(1 - p[0] - p[1]))


def emission_rate(rates: ThreeLevelRates, quantum_efficiency: float = 1.0) -> float:
    """Photon emission rate (1/s): p_excited·k21·QE."""
    if not 0 < quantum_efficiency <= 1:
        raise InvalidArgumentError(
            f"quantum efficiency must lie in (0, 1], got {quantum_efficiency}"
        )
    return steady_state(rates).p_excited * rates.k21 * quantum_efficiency


def _rk4_step_matrix(generator: np.ndarray, step: float) -> np.ndarray:
    """One classical RK4 step of a linear system, as a matrix."""
    hg = generator * step
    identity = np.eye(generator.shape[0])
    return identity + hg @ (identity + hg @ (identity / 2 + hg @ (identity / 6 + hg / 24)))


def default_step(rates: ThreeLevelRates) -> float:
    """RK4 step (ns): a hundredth of the fastest timescale."""
    total, product = _trace_and_product(rates)
    fastest = (total + math.sqrt(max(total * total - 4 * product, 0.0))) / 2
    return 1 / fastest / NS / RK4_STEPS_PER_TAU


def integrate_populations(
    rates: ThreeLevelRates,
    initial: PopulationState,
    duration: float,
    step: float | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Fixed-step RK4 trajectory of the master rate equations.

    Args:
        rates: Transition rates
        initial: Starting populations
        duration: Integration time (ns)
        step: Step (ns), default default_step(rates)

    Returns:
        (times_ns, populations) with populations shaped (steps + 1, 3)
    """
    if duration < 0:
        raise InvalidArgumentError(f"duration must be >= 0, got {duration}")
    step = default_step(rates) if step is None else step
    if not step > 0:
        raise InvalidArgumentError(f"step must be positive, got {step}")
    count = max(1, math.ceil(duration / step))
    step = duration / count if duration > 0 else step
    advance = _rk4_step_matrix(rate_matrix(rates), step * NS)
    populations = np.empty((count + 1, 3))
    populations[0] = initial.as_vector()
    for n in range(count):
        populations[n + 1] = advance @ populations[n]
    return np.arange(count + 1) * step, populations


def evolve(
    rates: ThreeLevelRates,
    initial: PopulationState,
    duration: float,
    step: float | None = None,
) -> np.ndarray:
    """Populations after ``duration`` ns of fixed-step RK4, without the trajectory."""
    if duration < 0:
        raise InvalidArgumentError(f"duration must be >= 0, got {duration}")
    step = default_step(rates) if step is None else step
    if not step > 0:
        raise InvalidArgumentError(f"step must be positive, got {step}")
    if duration == 0:
        return initial.as_vector()
    count = math.ceil(duration / step)
    advance = _rk4_step_matrix(rate_matrix(rates), duration / count * NS)
    return np.linalg.matrix_power(advance, count) @ initial.as_vector()


def conditional_g2(rates: ThreeLevelRates, taus) -> np.ndarray:
    """
    g²(τ) from the RK4-propagated excited population after a detection.

    A detection leaves the emitter in the ground state; g²(τ) is
    p2(τ)/p2(∞). Each delay is reached in whole steps of at most
    default_step(rates).
    """
    taus = np.abs(np.asarray(taus, dtype=float))
    generator = rate_matrix(rates)
    target = steady_state(rates).p_excited
    if target <= 0:
        raise InvalidArgumentError("the excited state is empty in steady state")
    limit = default_step(rates)
    start = np.array([1.0, 0.0, 0.0])
    result = np.empty(taus.shape)
    for index, tau in np.ndenumerate(taus):
        if tau == 0:
            result[index] = 0.0
            continue
        count = math.ceil(tau / limit)
        advance = _rk4_step_matrix(generator, tau / count * NS)
        result[index] = (np.linalg.matrix_power(advance, count) @ start)[1] / target
    return result
