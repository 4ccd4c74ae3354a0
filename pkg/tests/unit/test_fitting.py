"""
Unit tests for cav_fitting.
"""

import numpy as np
import pytest

from cav_common.errors import InvalidArgumentError
from cav_common.models import G2Model, SaturationParams
from cav_emitter import PowerDependentRates, rates_to_g2_params
from cav_fitting import (
    FitProblem,
    GaussianPeak,
    fit,
    fit_g2,
    fit_gaussian_peaks,
    fit_rate_model,
    fit_saturation,
    g2_objective,
    gaussian_objective,
    gradient_norm,
    numerical_jacobian,
    poisson_weights,
    saturation_jacobian,
    saturation_objective,
    synth_g2,
    synth_peaks,
    synth_saturation,
)
from cav_fitting.models import _peak_guess

K21 = 1 / 6.0e-9
G2_TRUTH = G2Model(sigma=0.87, a=1.2, tau1=2.0, tau2=50.0)
SATURATION_TRUTH = SaturationParams(I_inf=4000.0, P_sat=3.9, c_bg=10.0)
TAUS = np.linspace(-300.0, 300.0, 601)


def within_sigmas(result, truth, sigmas=3.0):
    return np.all(np.abs(result.params - truth) <= sigmas * result.errors)


def five_point_jacobian(model, params, x):
    """Independent five-point-stencil Jacobian."""
    columns = []
    for j in range(params.size):
        h = 1e-3 * max(abs(params[j]), 1e-3)
        shifted = []
        for k in (-2, -1, 1, 2):
            p = params.copy()
            p[j] += k * h
            shifted.append(model(p, x))
        columns.append((shifted[0] - 8 * shifted[1] + 8 * shifted[2] - shifted[3]) / (12 * h))
    return np.column_stack(columns)


class TestEngine:
    """The damped least-squares engine."""

    def test_linear_model_matches_closed_form(self):
        rng = np.random.default_rng(0)
        x = np.linspace(1, 10, 20)
        y = 2.5 * x + 0.1 * rng.standard_normal(x.size)
        w = rng.uniform(0.5, 2.0, x.size)
        problem = FitProblem(
            lambda p, x: p[0] * x, x, y, [0.0], [-np.inf], [np.inf], weights=w
        )
        result = fit(problem)
        expected = np.sum(w * x * y) / np.sum(w * x * x)
        assert result.converged
        assert result.params[0] == pytest.approx(expected, rel=1e-10)

    def test_exact_data_is_a_fixed_point(self):
        truth = np.array([SATURATION_TRUTH.I_inf, SATURATION_TRUTH.P_sat, SATURATION_TRUTH.c_bg])
        x = np.linspace(0.2, 20, 30)
        problem = FitProblem(
            saturation_objective, x, saturation_objective(truth, x), truth, [0, 1e-9, 0], [np.inf] * 3
        )
        result = fit(problem)
        assert result.converged
        assert result.iterations <= 2
        np.testing.assert_allclose(result.params, truth, rtol=1e-10)

    def test_cost_never_increases(self):
        rng = np.random.default_rng(4)
        y = synth_g2(G2_TRUTH, TAUS, 0.01, rng)
        _, result = fit_g2(TAUS, y, initial=G2Model(0.7, 0.5, 5.0, 20.0))
        assert len(result.cost_history) >= 2
        assert np.all(np.diff(result.cost_history) <= 0)

    def test_fixed_parameter_is_held(self):
        x = np.linspace(0.2, 20, 30)
        y = saturation_objective(np.array([4000.0, 3.9, 10.0]), x)
        problem = FitProblem(
            saturation_objective, x, y, [3000.0, 3.9, 5.0], [0, 3.9, 0], [np.inf, 3.9, np.inf]
        )
        result = fit(problem)
        assert result.params[1] == 3.9
        np.testing.assert_array_equal(result.covariance[1], 0.0)
        np.testing.assert_array_equal(result.covariance[:, 1], 0.0)

    def test_bounds_are_respected(self):
        x = np.linspace(1, 10, 10)
        problem = FitProblem(lambda p, x: p[0] * x, x, 3.0 * x, [0.5], [0.0], [2.0])
        result = fit(problem)
        assert result.params[0] == 2.0
        assert result.converged
        assert gradient_norm(problem, result.params) == 0.0

    @pytest.mark.parametrize("seed", range(5))
    def test_gradient_vanishes_at_solution(self, seed):
        rng = np.random.default_rng(seed)
        x = np.linspace(0.2, 20, 30)
        y = synth_saturation(SATURATION_TRUTH, x, 0.01, rng)
        problem = FitProblem(saturation_objective, x, y, [3000.0, 2.0, 0.0], [0, 1e-9, 0], [np.inf] * 3)
        result = fit(problem)
        residuals = y - saturation_objective(result.params, x)
        cost = float(residuals @ residuals)

        assert result.converged
        assert gradient_norm(problem, result.params) < 1e-8 * (1 + cost)

    def test_gradient_norm_ignores_blocked_components(self):
        x = np.linspace(1, 10, 10)
        problem = FitProblem(lambda p, x: p[0] * x, x, 3.0 * x, [2.0], [0.0], [2.0 + 1e-12])
        assert gradient_norm(problem, [2.0 + 1e-12]) == 0.0
        assert gradient_norm(problem, [1.0]) > 0.0

    def test_iteration_limit_flags_non_convergence(self):
        rng = np.random.default_rng(1)
        y = synth_g2(G2_TRUTH, TAUS, 0.01, rng)
        limited = fit(
            FitProblem(
                g2_objective, TAUS, y, [0.5, 0.1, 20.0, 200.0], [1e-6, 0, 1e-6, 1e-6], [1, 1e3, 1e6, 1e6]
            ),
            max_iterations=1,
        )
        assert limited.iterations == 1
        assert not limited.converged
        assert "maximum iterations" in limited.message

    def test_rank_deficiency_is_reported(self):
        x = np.linspace(0, 1, 10)
        problem = FitProblem(
            lambda p, x: (p[0] + p[1]) * x, x, 2 * x, [0.3, 0.3], [-10, -10], [10, 10]
        )
        result = fit(problem)
        assert any("rank-deficient" in warning for warning in result.warnings)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"y": []},
            {"initial": [5.0]},
            {"lower": [2.0], "upper": [1.0]},
            {"weights": [-1.0, 1.0, 1.0]},
        ],
    )
    def test_invalid_problem(self, kwargs):
        values = {
            "model": lambda p, x: p[0] * x,
            "x": [1.0, 2.0, 3.0],
            "y": [1.0, 2.0, 3.0],
            "initial": [1.0],
            "lower": [0.0],
            "upper": [2.0],
        }
        values.update(kwargs)
        with pytest.raises(InvalidArgumentError):
            FitProblem(**values)

    def test_quantity_bridge(self):
        rng = np.random.default_rng(2)
        powers = np.linspace(0.2, 20, 40)
        _, result = fit_saturation(powers, synth_saturation(SATURATION_TRUTH, powers, 0.01, rng))
        quantity = result.quantity("P_sat", "mW")
        assert quantity.value == result.value("P_sat")
        assert quantity.sigma_plus == quantity.sigma_minus == result.errors[1]
        assert quantity.unit == "mW"
        with pytest.raises(InvalidArgumentError):
            result.quantity("nope")

    def test_report_layout(self):
        powers = np.linspace(0.2, 20, 10)
        _, result = fit_saturation(powers, synth_saturation(SATURATION_TRUTH, powers, 0.0, None))
        report = result.to_dict()
        assert set(report["params"]) == {"I_inf", "P_sat", "c_bg"}
        assert len(report["covariance"]) == 3
        assert report["converged"] is True

    def test_poisson_weights(self):
        np.testing.assert_array_equal(poisson_weights([0.0, 0.5, 4.0]), [1.0, 1.0, 0.25])


class TestJacobian:
    """Finite-difference Jacobians against an independent stencil."""

    @pytest.mark.parametrize("seed", range(10))
    def test_g2(self, seed):
        rng = np.random.default_rng(seed)
        params = np.array([rng.uniform(0.3, 1), rng.uniform(0, 3), rng.uniform(0.5, 5), rng.uniform(20, 200)])
        x = np.linspace(-100, 100, 41)
        np.testing.assert_allclose(
            numerical_jacobian(g2_objective, params, x),
            five_point_jacobian(g2_objective, params, x),
            rtol=1e-4,
            atol=1e-6,
        )

    @pytest.mark.parametrize("seed", range(10))
    def test_saturation(self, seed):
        rng = np.random.default_rng(seed)
        params = np.array([rng.uniform(1e3, 1e4), rng.uniform(1, 10), rng.uniform(0, 50)])
        x = np.linspace(0.1, 20, 25)
        numeric = numerical_jacobian(saturation_objective, params, x)
        np.testing.assert_allclose(
            numeric, five_point_jacobian(saturation_objective, params, x), rtol=1e-4, atol=1e-6
        )
        np.testing.assert_allclose(saturation_jacobian(params, x), numeric, rtol=1e-6, atol=1e-6)

    @pytest.mark.parametrize("seed", range(10))
    def test_gaussian(self, seed):
        rng = np.random.default_rng(seed)
        params = np.array([rng.uniform(0, 50), rng.uniform(8, 12), rng.uniform(0.3, 1.0), rng.uniform(50, 500)])
        x = np.linspace(5, 15, 61)
        np.testing.assert_allclose(
            numerical_jacobian(gaussian_objective, params, x),
            five_point_jacobian(gaussian_objective, params, x),
            rtol=1e-4,
            atol=1e-6,
        )


class TestG2Fit:
    """Autocorrelation fits."""

    def test_exact_fixed_point(self):
        y = g2_objective(G2_TRUTH.as_vector(), TAUS)
        model, result = fit_g2(TAUS, y, initial=G2_TRUTH)
        assert result.converged
        assert result.iterations <= 2
        np.testing.assert_allclose(model.as_vector(), G2_TRUTH.as_vector(), rtol=1e-10)

    def test_synthetic_recovery(self):
        rng = np.random.default_rng(0)
        y = synth_g2(G2_TRUTH, TAUS, 0.01, rng)
        _, result = fit_g2(TAUS, y, initial=G2Model(0.8, 1.0, 3.0, 40.0), power_label="1.0 mW")
        assert result.converged
        assert result.label == "1.0 mW"
        assert within_sigmas(result, G2_TRUTH.as_vector())

    def test_two_level_emitter_has_no_bunching(self):
        rng = np.random.default_rng(5)
        truth = G2Model(1.0, 0.0, 2.0, 50.0)
        y = synth_g2(truth, TAUS, 0.01, rng)
        model, result = fit_g2(TAUS, y, initial=G2Model(0.9, 0.5, 3.0, 50.0))
        assert model.a <= 3 * result.errors[1] + 1e-9
        assert model.sigma <= 1.0

    def test_narrow_grid_warns(self):
        taus = np.linspace(-20, 20, 81)
        y = g2_objective(G2_TRUTH.as_vector(), taus)
        _, result = fit_g2(taus, y, initial=G2_TRUTH)
        assert any("does not resolve" in warning for warning in result.warnings)

    def test_guess_without_initial(self):
        rng = np.random.default_rng(6)
        y = synth_g2(G2_TRUTH, TAUS, 0.005, rng)
        model, result = fit_g2(TAUS, y)
        assert 0 < model.sigma <= 1
        assert result.iterations > 0


class TestSaturationFit:
    """Saturation-curve fits."""

    def test_exact_fixed_point(self):
        powers = np.linspace(0.2, 20, 30)
        y = synth_saturation(SATURATION_TRUTH, powers, 0.0, None)
        params, result = fit_saturation(powers, y, initial=SATURATION_TRUTH)
        assert result.iterations <= 2
        assert params.P_sat == pytest.approx(3.9, rel=1e-10)

    def test_synthetic_recovery(self):
        rng = np.random.default_rng(0)
        powers = np.linspace(0.2, 20, 40)
        _, result = fit_saturation(powers, synth_saturation(SATURATION_TRUTH, powers, 0.01, rng))
        assert result.converged
        assert within_sigmas(result, np.array([4000.0, 3.9, 10.0]))

    def test_pinned_background_matches_two_parameter_fit(self):
        rng = np.random.default_rng(3)
        powers = np.linspace(0.2, 20, 40)
        y = synth_saturation(SaturationParams(4000.0, 3.9), powers, 0.01, rng)
        params, _ = fit_saturation(powers, y, fit_background=False)
        two = fit(
            FitProblem(
                lambda p, x: p[0] * x / (x + p[1]),
                powers,
                y,
                [1.2 * y.max(), float(np.median(powers))],
                [0.0, 1e-300],
                [np.inf, np.inf],
            )
        )
        assert params.c_bg == 0.0
        assert params.I_inf == pytest.approx(two.params[0], rel=1e-7)
        assert params.P_sat == pytest.approx(two.params[1], rel=1e-7)

    def test_power_unit_rescales_saturation_power(self):
        rng = np.random.default_rng(7)
        powers = np.linspace(0.2, 20, 40)
        y = synth_saturation(SATURATION_TRUTH, powers, 0.01, rng)
        milliwatt, mw_result = fit_saturation(powers, y)
        watt, w_result = fit_saturation(powers * 1e-3, y)
        assert watt.P_sat == pytest.approx(milliwatt.P_sat * 1e-3, rel=1e-7)
        assert watt.c_bg == pytest.approx(milliwatt.c_bg * 1e3, rel=1e-6)
        assert w_result.reduced_chi_squared == pytest.approx(mw_result.reduced_chi_squared, rel=1e-9)

    def test_errors_shrink_with_more_data(self):
        errors = []
        for size in (50, 200, 800):
            rng = np.random.default_rng(size)
            powers = np.linspace(0.2, 20, size)
            _, result = fit_saturation(powers, synth_saturation(SATURATION_TRUTH, powers, 0.01, rng))
            errors.append(result.errors[1])
        assert 1.5 <= errors[0] / errors[1] <= 2.7
        assert 1.5 <= errors[1] / errors[2] <= 2.7

    def test_too_few_powers(self):
        with pytest.raises(InvalidArgumentError):
            fit_saturation([1.0, 2.0, 2.0, 3.0], [1.0, 2.0, 2.0, 3.0])


class TestGaussianPeaks:
    """Gaussian fits to cavity-length scans."""

    def test_single_exact_peak(self):
        x = np.linspace(5, 15, 201)
        truth = GaussianPeak(10.0, 0.5, 300.0)
        y = synth_peaks([truth], x, 20.0, 0.0, None)
        (peak,), result = fit_gaussian_peaks(x, y, 1)
        assert result.converged
        assert peak.center == pytest.approx(10.0, abs=1e-8)
        assert peak.width == pytest.approx(0.5, abs=1e-8)
        assert peak.amplitude == pytest.approx(300.0, abs=1e-8 * 300)

    def test_two_overlapping_peaks(self):
        rng = np.random.default_rng(0)
        x = np.linspace(5, 15, 401)
        truth = [GaussianPeak(8.5, 0.5, 300.0), GaussianPeak(10.5, 0.6, 200.0)]
        y = synth_peaks(truth, x, 20.0, 0.01, rng)
        peaks, result = fit_gaussian_peaks(x, y, 2)
        assert result.converged
        assert [p.center for p in peaks] == sorted(p.center for p in peaks)
        expected = np.array([20.0, 8.5, 0.5, 300.0, 10.5, 0.6, 200.0])
        assert within_sigmas(result, expected)

    def test_seeds_at_tallest_maxima(self):
        # The shoulder peak at 14.5 is taller than the isolated one at 3 but less prominent.
        x = np.linspace(0, 20, 401)
        truth = [GaussianPeak(12.0, 1.0, 300.0), GaussianPeak(14.5, 0.4, 150.0), GaussianPeak(3.0, 0.4, 120.0)]
        y = synth_peaks(truth, x, 20.0, 0.0, None)
        guess = _peak_guess(x, y, 2)
        assert guess[1] == pytest.approx(12.0, abs=0.1)
        assert guess[4] == pytest.approx(14.5, abs=0.1)

    def test_flat_scan_does_not_converge(self):
        peaks, result = fit_gaussian_peaks(np.linspace(0, 1, 50), np.full(50, 7.0), 1)
        assert peaks == []
        assert not result.converged

    def test_needs_a_peak(self):
        with pytest.raises(InvalidArgumentError):
            fit_gaussian_peaks([1.0, 2.0], [1.0, 2.0], 0)

    def test_empty_scan(self):
        with pytest.raises(InvalidArgumentError):
            fit_gaussian_peaks([], [], 1)


class TestRateModelFit:
    """Power-dependent rates from per-power autocorrelation parameters."""

    def test_recovers_rates(self):
        truth = PowerDependentRates(
            alpha=2e7, k21=K21, shelving=1e6, deshelving=2e6, shelving_slope=5e5
        )
        powers = [0.5, 1.0, 2.0, 4.0, 8.0]
        models = [G2Model(1.0, *rates_to_g2_params(truth.at(p))) for p in powers]
        start = PowerDependentRates(
            alpha=1.5e7, k21=K21, shelving=1.5e6, deshelving=1.5e6, shelving_slope=3e5
        )
        fitted, result = fit_rate_model(powers, models, K21, start)
        assert result.converged
        assert fitted.alpha == pytest.approx(truth.alpha, rel=1e-6)
        assert fitted.shelving == pytest.approx(truth.shelving, rel=1e-6)
        assert fitted.deshelving == pytest.approx(truth.deshelving, rel=1e-6)
        assert fitted.shelving_slope == pytest.approx(truth.shelving_slope, rel=1e-6)
        assert fitted.deshelving_slope == 0.0

    def test_one_parameter_set_per_power(self):
        start = PowerDependentRates(1e7, K21, 1e6, 1e6)
        with pytest.raises(InvalidArgumentError):
            fit_rate_model([1.0, 2.0], [G2_TRUTH], K21, start)
