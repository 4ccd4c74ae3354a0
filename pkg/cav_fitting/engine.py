"""
Damped least-squares engine.

Levenberg-Marquardt with Marquardt's diagonal scaling: each iteration solves
(JᵀWJ + λ·diag(JᵀWJ))δ = JᵀW(y - f) and accepts the step only if the
weighted cost drops. λ is divided by 10 after an accepted step and
multiplied by 10 after a rejected one. Steps are clipped into the bounds;
parameters whose lower and upper bounds coincide are held fixed.

A fit has converged once ‖JᵀW(y - f)‖ < 1e-8·(1 + cost), leaving out
components that a bound blocks. Gauss-Newton steps taken below the cost
rounding floor are not recorded in the cost history, which therefore never
increases.
"""

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from cav_common.constants import FIT_MAX_ITERATIONS
from cav_common.errors import InvalidArgumentError
from cav_common.quantity import Quantity

logger = logging.getLogger(__name__)

Model = Callable[[np.ndarray, np.ndarray], np.ndarray]

INITIAL_DAMPING = 1e-3
DAMPING_FACTOR = 10.0
MAX_DAMPING = 1e16
GRADIENT_TOL = 1e-8


def jacobian_step(params: np.ndarray) -> np.ndarray:
    """Central-difference step per parameter: max(1e-8, 1e-6·|p|)."""
    return np.maximum(1e-8, 1e-6 * np.abs(params))


def numerical_jacobian(
    model: Model, params: np.ndarray, x: np.ndarray, free: np.ndarray | None = None
) -> np.ndarray:
    """
    Central-difference Jacobian of ``model`` with respect to the free parameters.

    Returns:
        Array shaped (len(x), free parameter count)
    """
    params = np.asarray(params, dtype=float)
    free = np.ones(params.size, dtype=bool) if free is None else free
    steps = jacobian_step(params)
    columns = []
    for j in np.flatnonzero(free):
        up = params.copy()
        down = params.copy()
        up[j] += steps[j]
        down[j] -= steps[j]
        columns.append((model(up, x) - model(down, x)) / (2 * steps[j]))
    if not columns:
        return np.zeros((np.asarray(x).shape[0], 0))
    return np.column_stack(columns)


def poisson_weights(y: Sequence[float]) -> np.ndarray:
    """Weights 1/max(y, 1) for count data."""
    return 1 / np.maximum(np.asarray(y, dtype=float), 1.0)


@dataclass(frozen=True, eq=False)
class FitProblem:
    """
    A weighted least-squares problem.

    ``model(params, x)`` returns predictions for every x. An optional
    ``jacobian(params, x)`` returns the full (len(x), len(params)) matrix
    and replaces the finite differences.
    """

    model: Model
    x: np.ndarray
    y: np.ndarray
    initial: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    weights: np.ndarray | None = None
    names: tuple[str, ...] = ()
    jacobian: Model | None = None

    def __post_init__(self) -> None:
        for name in ("x", "y", "initial", "lower", "upper"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if self.y.ndim != 1 or self.y.size == 0:
            raise InvalidArgumentError("fit data must be a non-empty 1-D array")
        if self.x.shape[0] != self.y.size:
            raise InvalidArgumentError(f"x has {self.x.shape[0]} rows but y has {self.y.size}")
        if not np.all(np.isfinite(self.y)):
            raise InvalidArgumentError("fit data contains non-finite values")
        weights = np.ones(self.y.size) if self.weights is None else np.asarray(self.weights, dtype=float)
        if weights.shape != self.y.shape or np.any(weights < 0) or not np.any(weights > 0):
            raise InvalidArgumentError("weights must be non-negative, one per point, not all zero")
        object.__setattr__(self, "weights", weights)
        n = self.initial.size
        if self.lower.size != n or self.upper.size != n:
            raise InvalidArgumentError("bounds must have one entry per parameter")
        if np.any(self.lower > self.upper):
            raise InvalidArgumentError("lower bounds exceed upper bounds")
        if np.any(self.initial < self.lower) or np.any(self.initial > self.upper):
            raise InvalidArgumentError("initial parameters lie outside the bounds")
        names = self.names or tuple(f"p{i}" for i in range(n))
        if len(names) != n:
            raise InvalidArgumentError(f"expected {n} parameter names, got {len(names)}")
        object.__setattr__(self, "names", tuple(names))

    @property
    def free(self) -> np.ndarray:
        return self.lower < self.upper


@dataclass(eq=False)
class FitResult:
    """Outcome of a fit; never raised on non-convergence."""

    params: np.ndarray
    covariance: np.ndarray
    reduced_chi_squared: float
    converged: bool
    iterations: int
    names: tuple[str, ...] = ()
    cost_history: list[float] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    message: str = ""
    label: str = ""

    @property
    def errors(self) -> np.ndarray:
        """One-sigma parameter errors from the covariance diagonal."""
        return np.sqrt(np.maximum(np.diag(self.covariance), 0.0))

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise InvalidArgumentError(f"unknown parameter {name!r}")

    def value(self, name: str) -> float:
        return float(self.params[self.index(name)])

    def quantity(self, name: str, unit: str = "") -> Quantity:
        """A fitted parameter as a symmetric Quantity."""
        i = self.index(name)
        return Quantity.symmetric(float(self.params[i]), float(self.errors[i]), unit)

    def to_dict(self) -> dict[str, Any]:
        """Convert to the fit report format."""
        return {
            "label": self.label,
            "params": {name: float(p) for name, p in zip(self.names, self.params, strict=True)},
            "errors": {name: float(e) for name, e in zip(self.names, self.errors, strict=True)},
            "covariance": [[float(v) for v in row] for row in self.covariance],
            "reduced_chi_squared": self.reduced_chi_squared,
            "converged": self.converged,
            "iterations": self.iterations,
            "cost_history": [float(c) for c in self.cost_history],
            "warnings": list(self.warnings),
            "message": self.message,
        }


def _weighted_residuals(problem: FitProblem, params: np.ndarray) -> np.ndarray:
    return np.sqrt(problem.weights) * (problem.y - problem.model(params, problem.x))


def _jacobian(problem: FitProblem, params: np.ndarray, free: np.ndarray) -> np.ndarray:
    """Weighted Jacobian of the model over the free parameters."""
    if problem.jacobian is not None:
        full = np.asarray(problem.jacobian(params, problem.x), dtype=float)
        jac = full[:, free]
    else:
        jac = numerical_jacobian(problem.model, params, problem.x, free)
    return np.sqrt(problem.weights)[:, None] * jac


def projected_gradient(
    jac: np.ndarray, residuals: np.ndarray, params: np.ndarray, problem: FitProblem
) -> np.ndarray:
    """
    Jᵀr over the free parameters, zeroed where a bound blocks the descent.

    The descent direction is +Jᵀr, so a component is blocked when its
    parameter sits on the lower bound with Jᵀr < 0 or on the upper bound
    with Jᵀr > 0.
    """
    gradient = jac.T @ residuals
    free = problem.free
    p = params[free]
    at_lower = (p <= problem.lower[free]) & (gradient < 0)
    at_upper = (p >= problem.upper[free]) & (gradient > 0)
    return np.where(at_lower | at_upper, 0.0, gradient)


def gradient_norm(problem: FitProblem, params: np.ndarray) -> float:
    """‖Jᵀr‖ at ``params`` with bound-blocked components removed."""
    params = np.asarray(params, dtype=float)
    jac = _jacobian(problem, params, problem.free)
    return float(np.linalg.norm(projected_gradient(jac, _weighted_residuals(problem, params), params, problem)))


def _stationary(gradient: np.ndarray, cost: float) -> bool:
    return float(np.linalg.norm(gradient)) < GRADIENT_TOL * (1 + cost)


def _cost_resolution(problem: FitProblem, params: np.ndarray, residuals: np.ndarray) -> float:
    """Rounding floor of the weighted cost from evaluating y - f in floating point."""
    scale = np.sqrt(problem.weights) * (np.abs(problem.y) + np.abs(problem.model(params, problem.x)))
    return float(8 * np.finfo(float).eps * np.sum(np.abs(residuals) * scale))


def _refine(
    problem: FitProblem,
    jac: np.ndarray,
    params: np.ndarray,
    residuals: np.ndarray,
    cost: float,
    descent: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, float] | None:
    """
    Gauss-Newton step for when no damped step lowers the cost.

    Near the minimum the cost change of a step can fall below the rounding
    of the cost itself. The step is taken when its cost stays within that
    floor and it at least halves the projected gradient; otherwise None.
    """
    free = problem.free
    step = np.linalg.lstsq(jac, residuals, rcond=None)[0]
    trial = params.copy()
    trial[free] = np.clip(params[free] + step, problem.lower[free], problem.upper[free])
    trial_residuals = _weighted_residuals(problem, trial)
    trial_cost = float(trial_residuals @ trial_residuals)
    if not np.isfinite(trial_cost) or trial_cost > cost + _cost_resolution(problem, params, residuals):
        return None
    trial_jac = _jacobian(problem, trial, free)
    if not np.all(np.isfinite(trial_jac)):
        return None
    trial_descent = projected_gradient(trial_jac, trial_residuals, trial, problem)
    if np.linalg.norm(trial_descent) > 0.5 * np.linalg.norm(descent):
        return None
    return trial, trial_residuals, trial_cost


def _covariance(
    jac: np.ndarray, free: np.ndarray, reduced_chi_squared: float
) -> tuple[np.ndarray, bool]:
    """Full covariance with zero rows for fixed parameters, and a rank-deficiency flag."""
    n = free.size
    covariance = np.zeros((n, n))
    if jac.shape[1] == 0:
        return covariance, False
    normal = jac.T @ jac
    deficient = np.linalg.matrix_rank(jac) < jac.shape[1]
    inner = np.linalg.pinv(normal) * reduced_chi_squared
    index = np.flatnonzero(free)
    covariance[np.ix_(index, index)] = (inner + inner.T) / 2
    return covariance, bool(deficient)


def fit(
    problem: FitProblem,
    max_iterations: int = FIT_MAX_ITERATIONS,
    initial_damping: float = INITIAL_DAMPING,
    label: str = "",
) -> FitResult:
    """
    Minimize the weighted squared residuals of ``problem``.

    Args:
        problem: Model, data, start point and bounds
        max_iterations: Jacobian evaluations before giving up
        initial_damping: Starting λ
        label: Free-form tag copied into the result

    Returns:
        FitResult; ``converged`` is False when the iteration limit is hit
        or no step reduces the cost or the gradient away from a stationary point

    Raises:
        InvalidArgumentError: If the model is not finite at the start point
    """
    free = problem.free
    params = problem.initial.copy()
    residuals = _weighted_residuals(problem, params)
    if not np.all(np.isfinite(residuals)):
        raise InvalidArgumentError("model is not finite at the initial parameters")
    cost = float(residuals @ residuals)
    history = [cost]
    warnings: list[str] = []
    damping = initial_damping
    converged = False
    message = f"maximum iterations ({max_iterations}) reached"
    iterations = 0

    while iterations < max_iterations:
        jac = _jacobian(problem, params, free)
        if not np.all(np.isfinite(jac)):
            message = "Jacobian is not finite"
            warnings.append(message)
            break
        descent = projected_gradient(jac, residuals, params, problem)
        if jac.shape[1] == 0 or _stationary(descent, cost):
            converged = True
            message = "gradient tolerance reached"
            break
        iterations += 1
        normal = jac.T @ jac
        gradient = jac.T @ residuals
        diagonal = np.diag(normal).copy()
        diagonal[diagonal == 0] = 1.0

        accepted = False
        while damping <= MAX_DAMPING:
            try:
                step = np.linalg.solve(normal + damping * np.diag(diagonal), gradient)
            except np.linalg.LinAlgError:
                damping *= DAMPING_FACTOR
                continue
            trial = params.copy()
            trial[free] = np.clip(params[free] + step, problem.lower[free], problem.upper[free])
            trial_residuals = _weighted_residuals(problem, trial)
            trial_cost = float(trial_residuals @ trial_residuals)
            if np.isfinite(trial_cost) and trial_cost < cost:
                params, residuals, cost = trial, trial_residuals, trial_cost
                history.append(cost)
                damping = max(damping / DAMPING_FACTOR, 1e-300)
                accepted = True
                break
            damping *= DAMPING_FACTOR
        logger.debug(f"iteration {iterations}: cost={cost:.6g}, lambda={damping:.3g}")

        if not accepted:
            refined = _refine(problem, jac, params, residuals, cost, descent)
            if refined is None:
                message = "cost cannot be reduced further"
                break
            params, residuals, cost = refined
            damping = initial_damping
            logger.debug(f"iteration {iterations}: refined below cost resolution, cost={cost:.6g}")
            continue
        if cost == 0.0:
            converged = True
            message = "exact fit"
            break
    else:
        # The last accepted step may have landed on a stationary point.
        last_jac = _jacobian(problem, params, free)
        if np.all(np.isfinite(last_jac)) and _stationary(
            projected_gradient(last_jac, residuals, params, problem), cost
        ):
            converged = True
            message = "gradient tolerance reached"

    dof = problem.y.size - int(np.count_nonzero(free))
    if dof <= 0:
        warnings.append("no degrees of freedom: reduced chi-squared uses dof = 1")
    reduced = cost / max(dof, 1)
    final_jac = _jacobian(problem, params, free)
    covariance, deficient = _covariance(final_jac, free, reduced)
    if deficient:
        warnings.append("rank-deficient Jacobian: some parameters are not determined by the data")
        logger.warning(f"Fit {label or 'result'}: rank-deficient Jacobian")
    if not converged:
        logger.warning(f"Fit {label or 'result'} did not converge: {message}")
    else:
        logger.info(f"Fit {label or 'result'} converged in {iterations} iterations, chi2_red={reduced:.4g}")
    return FitResult(
        params=params,
        covariance=covariance,
        reduced_chi_squared=reduced,
        converged=converged,
        iterations=iterations,
        names=problem.names,
        cost_history=history,
        warnings=warnings,
        message=message,
        label=label,
    )
