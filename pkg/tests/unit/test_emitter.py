"""
Unit tests for cav_emitter.
"""

import math

import numpy as np
import pytest

from cav_common.errors import DegenerateRatesError, InvalidArgumentError
from cav_common.models import G2Model, PopulationState, SaturationParams, ThreeLevelRates
from cav_emitter import (
    PowerDependentRates,
    conditional_g2,
    emission_rate,
    emission_vs_power,
    evolve,
    g2_intrinsic,
    g2_measured,
    g2_params_model,
    infinite_power_limit,
    integrate_populations,
    populations_vs_power,
    rate_matrix,
    rates_for_dark_limit,
    rates_to_g2_params,
    saturated_emission_rate,
    saturation_model,
    saturation_power_fraction,
    sigma_from_g2_zero,
    steady_state,
)

K21 = 1 / 6.0e-9


def random_rates(seed: int) -> ThreeLevelRates:
    """Physical rates: fast bright transitions, slow dark-state exchange."""
    rng = np.random.default_rng(seed)
    return ThreeLevelRates(
        k12=float(10 ** rng.uniform(6, 8.7)),
        k21=float(rng.uniform(1e8, 2e8)),
        k23=float(10 ** rng.uniform(5, 7.7)),
        k31=float(10 ** rng.uniform(5, 7)),
    )


def random_model(seed: int) -> G2Model:
    rng = np.random.default_rng(seed)
    return G2Model(
        sigma=float(rng.uniform(0.01, 1.0)),
        a=float(rng.uniform(0, 5)),
        tau1=float(rng.uniform(0.5, 20)),
        tau2=float(rng.uniform(20, 2000)),
    )


class TestAutocorrelation:
    """Analytic g² with and without background."""

    def test_zero_delay(self):
        assert g2_intrinsic(0.0, 0.7, 2.0, 90.0) == 0.0

    def test_long_delay(self):
        assert g2_intrinsic(1e6, 0.7, 2.0, 90.0) == pytest.approx(1.0, abs=1e-12)

    def test_reference_value(self):
        assert g2_intrinsic(10.0, 0.5, 1.0, 100.0) == pytest.approx(1.4524, abs=1e-4)

    def test_no_background_is_intrinsic(self):
        taus = np.linspace(-50, 50, 101)
        model = G2Model(1.0, 0.5, 1.0, 100.0)
        np.testing.assert_allclose(g2_measured(taus, model), g2_intrinsic(taus, 0.5, 1.0, 100.0))

    def test_background_flattens(self):
        taus = np.linspace(0, 50, 51)
        model = G2Model(1e-6, 0.5, 1.0, 100.0)
        np.testing.assert_allclose(g2_measured(taus, model), 1.0, atol=1e-11)

    @pytest.mark.parametrize("seed", range(500))
    def test_measured_zero_delay(self, seed):
        model = random_model(seed)
        assert g2_measured(0.0, model) == 1 - model.sigma**2

    @pytest.mark.parametrize("seed", range(20))
    def test_even_and_settles(self, seed):
        model = random_model(seed)
        taus = np.linspace(0, 300, 61)
        np.testing.assert_array_equal(g2_measured(taus, model), g2_measured(-taus, model))
        far = 10 * max(model.tau1, model.tau2)
        bound = (1 + 2 * model.a) * math.exp(-10) + 1e-12
        assert abs(g2_intrinsic(far, model.a, model.tau1, model.tau2) - 1) <= bound

    def test_sigma_from_g2_zero(self):
        assert sigma_from_g2_zero(0.25) == pytest.approx(0.866, abs=1e-3)

    @pytest.mark.parametrize("value", [-0.1, 1.0, 1.5])
    def test_sigma_from_invalid_g2_zero(self, value):
        with pytest.raises(InvalidArgumentError):
            sigma_from_g2_zero(value)


class TestRatesToG2:
    """Mapping from rates to (a, τ1, τ2)."""

    def test_two_level_limit(self):
        rates = ThreeLevelRates(k12=5e7, k21=K21, k23=0.0, k31=1e6)
        a, tau1, _ = rates_to_g2_params(rates)
        assert a == 0.0
        assert tau1 == pytest.approx(1e9 / (5e7 + K21), rel=1e-12)

    def test_eigenvalues(self):
        rates = random_rates(3)
        _, tau1, tau2 = rates_to_g2_params(rates)
        eigenvalues = np.sort(-np.linalg.eigvals(rate_matrix(rates)).real)
        assert eigenvalues[0] == pytest.approx(0.0, abs=1e-6 * eigenvalues[-1])
        assert 1e9 / tau2 == pytest.approx(eigenvalues[1], rel=1e-9)
        assert 1e9 / tau1 == pytest.approx(eigenvalues[2], rel=1e-9)

    @pytest.mark.parametrize("seed", range(100))
    def test_matches_integrated_populations(self, seed):
        rates = random_rates(seed)
        a, tau1, tau2 = rates_to_g2_params(rates)
        taus = np.linspace(0, 10 * tau2, 40)
        np.testing.assert_allclose(
            conditional_g2(rates, taus), g2_intrinsic(taus, a, tau1, tau2), rtol=1e-6, atol=1e-9
        )

    def test_time_rescaling(self):
        rates = random_rates(7)
        a, tau1, tau2 = rates_to_g2_params(rates)
        a3, tau1_3, tau2_3 = rates_to_g2_params(rates.scaled(3.0))
        assert a3 == pytest.approx(a, rel=1e-9)
        assert tau1_3 == pytest.approx(tau1 / 3, rel=1e-12)
        assert tau2_3 == pytest.approx(tau2 / 3, rel=1e-12)

    def test_bunching_grows_with_shelving(self):
        amplitudes = [
            rates_to_g2_params(ThreeLevelRates(1e8, K21, float(k23), 1e6))[0]
            for k23 in np.geomspace(1e4, 1e8, 20)
        ]
        assert all(later >= earlier for earlier, later in zip(amplitudes, amplitudes[1:]))

    def test_params_model(self):
        rates = ThreeLevelRates(1e8, K21, 1e6, 2e6)
        model = g2_params_model(rates, sigma=0.8)
        assert model == G2Model(0.8, *rates_to_g2_params(rates))

    def test_no_pump(self):
        with pytest.raises(InvalidArgumentError):
            rates_to_g2_params(ThreeLevelRates(0.0, K21, 1e6, 1e6))

    def test_degenerate_timescales(self):
        # Both decay rates equal 2e8 when total = 4e8 and product = 4e16.
        rates = ThreeLevelRates(k12=1e8, k21=1e8, k23=1e8, k31=1e8)
        with pytest.raises(DegenerateRatesError):
            rates_to_g2_params(rates)


class TestSteadyState:
    """Steady-state populations and emission."""

    def test_no_pump(self):
        state = steady_state(ThreeLevelRates(0.0, K21, 1e6, 1e5))
        assert (state.p_ground, state.p_excited, state.p_dark) == (1.0, 0.0, 0.0)

    @pytest.mark.parametrize("seed", range(50))
    def test_normalized(self, seed):
        state = steady_state(random_rates(seed))
        assert abs(state.p_ground + state.p_excited + state.p_dark - 1) < 1e-12

    @pytest.mark.parametrize("seed", range(10))
    def test_null_vector(self, seed):
        rates = random_rates(seed)
        residual = rate_matrix(rates) @ steady_state(rates).as_vector()
        assert np.max(np.abs(residual)) < 1e-9 * rates.k21

    @pytest.mark.parametrize("seed", range(10))
    def test_fixed_point_of_evolution(self, seed):
        rates = random_rates(seed)
        rng = np.random.default_rng(100 + seed)
        start = rng.dirichlet(np.ones(3))
        initial = PopulationState(float(start[0]), float(start[1]), float(1 - start[0] - start[1]))
        _, _, tau2 = rates_to_g2_params(rates)
        final = evolve(rates, initial, 20 * tau2)
        np.testing.assert_allclose(final, steady_state(rates).as_vector(), atol=1e-6)

    def test_trajectory_conserves_probability(self):
        rates = random_rates(1)
        times, populations = integrate_populations(
            rates, PopulationState(1.0, 0.0, 0.0), duration=50.0
        )
        assert times[-1] == pytest.approx(50.0)
        np.testing.assert_allclose(populations.sum(axis=1), 1.0, atol=1e-12)

    def test_emission_zero_pump(self):
        assert emission_rate(ThreeLevelRates(0.0, K21, 1e6, 1e5)) == 0.0

    def test_emission_scales_with_efficiency(self):
        rates = random_rates(2)
        assert emission_rate(rates, 0.5) == pytest.approx(emission_rate(rates) / 2, rel=1e-15)

    def test_invalid_efficiency(self):
        with pytest.raises(InvalidArgumentError):
            emission_rate(random_rates(2), 0.0)


class TestPowerDependence:
    """Rates against pump power and their infinite-power limit."""

    def test_dark_population_limit(self):
        model = rates_for_dark_limit(K21, alpha=2e7, shelving=5e6, dark_fraction=0.96)
        assert infinite_power_limit(model).p_dark == pytest.approx(0.96, rel=1e-12)
        high = populations_vs_power(model, [1e6])[0]
        assert high[2] == pytest.approx(0.96, rel=1e-3)

    def test_power_dependent_shelving_limit(self):
        model = rates_for_dark_limit(
            K21, alpha=2e7, shelving=1e6, dark_fraction=0.96, shelving_slope=3e5
        )
        assert model.power_dependent == ["k12", "k23", "k31"]
        limit = infinite_power_limit(model)
        expected = (
            model.alpha * model.shelving_slope
            / (
                model.alpha * model.shelving_slope
                + model.alpha * model.deshelving_slope
                + model.shelving_slope * model.deshelving_slope
            )
        )
        assert limit.p_dark == pytest.approx(expected, rel=1e-12)
        assert limit.p_dark == pytest.approx(0.96, rel=1e-12)

    def test_populations_start_in_ground_state(self):
        model = PowerDependentRates(alpha=1e7, k21=K21, shelving=1e6, deshelving=1e5)
        rows = populations_vs_power(model, [0.0, 1.0, 10.0])
        np.testing.assert_array_equal(rows[0], [1.0, 0.0, 0.0])
        assert np.all(np.diff(rows[:, 2]) > 0)

    def test_saturated_emission(self):
        dark = 1 - 6.8e6 / K21
        model = rates_for_dark_limit(K21, alpha=2e7, shelving=5e6, dark_fraction=dark)
        assert saturated_emission_rate(model) == pytest.approx(6.8e6, rel=1e-9)

    def test_emission_vs_power(self):
        model = PowerDependentRates(alpha=1e7, k21=K21, shelving=1e6, deshelving=1e5)
        powers = [0.0, 2.0, 20.0]
        rates = emission_vs_power(model, powers, quantum_efficiency=0.5)
        assert rates[0] == 0.0
        np.testing.assert_allclose(rates, [emission_rate(model.at(p), 0.5) for p in powers])

    def test_round_trip_dict(self):
        model = PowerDependentRates(1e7, K21, 1e6, 1e5, 2e4, 0.0)
        assert PowerDependentRates.from_dict(model.to_dict()) == model

    def test_negative_power(self):
        model = PowerDependentRates(1e7, K21, 1e6, 1e5)
        with pytest.raises(InvalidArgumentError):
            model.at(-1.0)

    @pytest.mark.parametrize("fraction", [0.0, 1.0])
    def test_invalid_dark_fraction(self, fraction):
        with pytest.raises(InvalidArgumentError):
            rates_for_dark_limit(K21, 1e7, 1e6, fraction)


class TestSaturation:
    """Saturation curve."""

    def test_zero_power(self):
        assert saturation_model(0.0, SaturationParams(4000, 3.9)) == 0.0

    def test_half_saturation(self):
        assert saturation_model(3.9, SaturationParams(4000, 3.9)) == pytest.approx(2000)

    def test_confocal_reference(self):
        assert saturation_model(19.0, SaturationParams(4000, 3.9)) == pytest.approx(3319, abs=1)

    def test_background_is_linear(self):
        powers = np.array([10.0, 20.0])
        with_bg = saturation_model(powers, SaturationParams(4000, 3.9, 5.0))
        without = saturation_model(powers, SaturationParams(4000, 3.9))
        np.testing.assert_allclose(with_bg - without, 5.0 * powers)

    def test_negative_power(self):
        with pytest.raises(InvalidArgumentError):
            saturation_model(-1.0, SaturationParams(4000, 3.9))

    def test_power_fraction(self):
        params = SaturationParams(4000, 3.9)
        assert saturation_power_fraction(3.9, params) == pytest.approx(0.5)
        assert saturation_power_fraction(0.0, params) == 0.0
        with pytest.raises(InvalidArgumentError):
            saturation_power_fraction(-0.1, params)
