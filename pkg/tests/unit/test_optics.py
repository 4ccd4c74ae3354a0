"""
Unit tests for cav_optics.

Covers the Fresnel/propagation building blocks, stack responses against
independently coded oracles, field profiles, and Bragg mirror design.
"""

import cmath
import math

import numpy as np
import pytest

from cav_common.errors import DesignInfeasibleError, InvalidArgumentError
from cav_common.models import IndexTable, Layer, LayerStack
from cav_optics import (
    bragg_layers,
    concatenate,
    design_bragg_mirror,
    design_dual_band_mirror,
    field_at,
    field_profile,
    fresnel_coefficients,
    interface_matrix,
    layer_phase,
    propagation_matrix,
    reverse,
    stack_response,
    system_matrix,
    with_media,
)

N_DIAMOND = 2.41
N_HI = 2.10
N_LO = 1.46


def random_stack(seed: int) -> tuple[LayerStack, float]:
    """A random lossless stack and a wavelength to evaluate it at."""
    rng = np.random.default_rng(seed)
    count = int(rng.integers(0, 13))
    layers = tuple(
        Layer(float(rng.uniform(0, 500)), float(rng.uniform(1.0, 3.0))) for _ in range(count)
    )
    stack = LayerStack(
        incident_medium_index=float(rng.uniform(1.0, 2.5)),
        layers=layers,
        exit_medium_index=float(rng.uniform(1.0, 2.5)),
    )
    return stack, float(rng.uniform(400, 900))


def dynamical(n: complex) -> np.ndarray:
    return np.array([[1, 1], [n, -n]], dtype=complex)


def naive_response(stack: LayerStack, wavelength: float) -> tuple[complex, complex]:
    """Sequential D·P·D⁻¹ product, coded without the library's interface matrices."""
    n_in = complex(stack.incident_medium_index)
    n_exit = complex(stack.exit_medium_index)
    matrix = np.linalg.inv(dynamical(n_in))
    for layer in stack.layers:
        n = complex(layer.refractive_index)
        delta = 2 * np.pi * n * layer.thickness / wavelength
        phase = np.diag([np.exp(-1j * delta), np.exp(1j * delta)])
        matrix = matrix @ dynamical(n) @ phase @ np.linalg.inv(dynamical(n))
    matrix = matrix @ dynamical(n_exit)
    return matrix[1, 0] / matrix[0, 0], 1 / matrix[0, 0]


def characteristic_RT(stack: LayerStack, wavelength: float) -> tuple[float, float]:
    """Characteristic-matrix (admittance) oracle for R and T."""
    n_in = complex(stack.incident_medium_index).real
    n_exit = complex(stack.exit_medium_index).real
    total = np.eye(2, dtype=complex)
    for layer in stack.layers:
        n = complex(layer.refractive_index).real
        delta = 2 * np.pi * n * layer.thickness / wavelength
        total = total @ np.array(
            [[np.cos(delta), 1j * np.sin(delta) / n], [1j * n * np.sin(delta), np.cos(delta)]]
        )
    b, c = total @ np.array([1, n_exit])
    denominator = n_in * b + c
    r = (n_in * b - c) / denominator
    return abs(r) ** 2, 4 * n_in * n_exit / abs(denominator) ** 2


def quarter_wave_mirror(pairs: int, termination: str = "hi") -> LayerStack:
    return LayerStack(1.0, bragg_layers(603.0, N_HI, N_LO, pairs, termination), N_LO)


class TestFresnel:
    """Test suite for interface coefficients and matrices."""

    def test_air_diamond_sign(self):
        """Test the reflection amplitude sign for air into diamond."""
        r, t = fresnel_coefficients(1.0, N_DIAMOND)

        assert r.real == pytest.approx(-0.4135, abs=1e-4)
        assert t.real == pytest.approx(2 / 3.41)
        assert r.imag == 0

    def test_swap_flips_sign(self):
        """Test that reversing the interface flips r."""
        r_forward, _ = fresnel_coefficients(1.0, N_DIAMOND)
        r_backward, _ = fresnel_coefficients(N_DIAMOND, 1.0)

        assert r_backward == pytest.approx(-r_forward)

    def test_equal_indices_identity(self):
        """Test that an interface between equal media is the identity."""
        np.testing.assert_allclose(interface_matrix(1.7, 1.7), np.eye(2), atol=1e-15)

    @pytest.mark.parametrize("n1,n2", [(1.0, 2.41), (1.46, 2.10), (2.41, 1.0 + 0.1j)])
    def test_inverse_direction_composes_to_identity(self, n1, n2):
        """Test I(n1, n2) · I(n2, n1) = identity."""
        product = interface_matrix(n1, n2) @ interface_matrix(n2, n1)

        np.testing.assert_allclose(product, np.eye(2), atol=1e-12)

    def test_zero_index_rejected(self):
        """Test that a zero index raises an invalid-argument error."""
        with pytest.raises(InvalidArgumentError):
            interface_matrix(0.0, 1.5)


class TestPropagation:
    """Test suite for layer propagation matrices."""

    def test_zero_thickness_is_identity(self):
        """Test that a zero-thickness layer does not propagate."""
        np.testing.assert_array_equal(propagation_matrix(Layer(0.0, 2.3), 603.0), np.eye(2))

    def test_quarter_wave_phase(self):
        """Test that n·d = λ/4 accumulates exactly π/2."""
        layer = Layer(603.0 / (4 * N_HI), N_HI)

        assert layer_phase(layer, 603.0).real == pytest.approx(math.pi / 2, abs=1e-12)

    def test_membrane_phase(self):
        """Test the phase of the 862 nm diamond membrane."""
        phase = layer_phase(Layer(862.0, N_DIAMOND), 603.0)

        assert phase.real == pytest.approx(2 * math.pi * 2.41 * 862 / 603)
        assert phase.real == pytest.approx(21.65, abs=5e-3)

    @pytest.mark.parametrize("seed", range(10))
    def test_unimodular(self, seed):
        """Test det = 1 for lossless layers."""
        rng = np.random.default_rng(seed)
        layer = Layer(float(rng.uniform(0, 2000)), float(rng.uniform(1, 3)))

        assert abs(np.linalg.det(propagation_matrix(layer, 603.0)) - 1) < 1e-12

    @pytest.mark.parametrize("wavelength", [0.0, -10.0])
    def test_non_positive_wavelength(self, wavelength):
        """Test that non-positive wavelengths are rejected."""
        with pytest.raises(InvalidArgumentError):
            propagation_matrix(Layer(10.0, 1.5), wavelength)


class TestStackResponse:
    """Test suite for stack reflection and transmission."""

    def test_empty_stack_matched_media(self):
        """Test that an empty stack between equal media transmits everything."""
        response = stack_response(LayerStack(1.5, (), 1.5), 603.0)

        assert response.R == pytest.approx(0.0, abs=1e-15)
        assert response.T == pytest.approx(1.0, abs=1e-15)

    def test_air_diamond_interface(self):
        """Test the bare air-diamond reflectance against the Fresnel value."""
        response = stack_response(LayerStack(1.0, (), N_DIAMOND), 603.0)

        assert response.R == pytest.approx(((1 - 2.41) / (1 + 2.41)) ** 2, abs=1e-12)
        assert response.R == pytest.approx(0.1710, abs=1e-4)
        assert abs(abs(response.phase_on_reflection) - math.pi) < 1e-12

    def test_bare_perfect_conductor(self):
        """Test that a perfect conductor reflects with r = -1 and transmits nothing."""
        response = stack_response(LayerStack(1.0, (), None), 603.0)

        assert response.r == pytest.approx(-1.0)
        assert response.T == 0.0

    @pytest.mark.parametrize("seed", range(100))
    def test_energy_conservation(self, seed):
        """Test R + T = 1 for random lossless stacks."""
        stack, wavelength = random_stack(seed)
        response = stack_response(stack, wavelength)

        assert abs(response.R + response.T - 1) < 1e-10

    @pytest.mark.parametrize("seed", range(100))
    def test_matches_sequential_product(self, seed):
        """Test agreement with the naive sequential matrix product."""
        stack, wavelength = random_stack(seed)
        response = stack_response(stack, wavelength)
        r, t = naive_response(stack, wavelength)

        assert abs(response.r - r) < 1e-10
        assert abs(response.t - t) < 1e-10

    @pytest.mark.parametrize("seed", range(100))
    def test_matches_characteristic_matrix(self, seed):
        """Test R and T against the admittance formulation."""
        stack, wavelength = random_stack(seed)
        response = stack_response(stack, wavelength)
        R, T = characteristic_RT(stack, wavelength)

        assert abs(response.R - R) < 1e-10
        assert abs(response.T - T) < 1e-10

    @pytest.mark.parametrize("seed", range(100))
    def test_reciprocity(self, seed):
        """Test that T is the same from either side."""
        stack, wavelength = random_stack(seed)

        forward = stack_response(stack, wavelength).T
        backward = stack_response(reverse(stack), wavelength).T

        assert abs(forward - backward) < 1e-10

    @pytest.mark.parametrize("seed", range(100))
    def test_sub_stack_composition(self, seed):
        """Test that M(A⊕B) = M(A) · M(B) when A exits into B's incident medium."""
        first, wavelength = random_stack(seed)
        second, _ = random_stack(seed + 1000)
        joined_first = LayerStack(
            first.incident_medium_index, first.layers, second.incident_medium_index
        )

        whole = system_matrix(concatenate(joined_first, second), wavelength)
        parts = system_matrix(joined_first, wavelength) @ system_matrix(second, wavelength)

        np.testing.assert_allclose(whole, parts, atol=1e-10 * max(1.0, np.abs(whole).max()))

    def test_with_media_replaces_surroundings(self):
        """Test that with_media swaps only the given medium and keeps the layers."""
        mirror = quarter_wave_mirror(5)
        in_diamond = with_media(mirror, incident=N_DIAMOND)

        assert in_diamond.layers == mirror.layers
        assert in_diamond.incident_medium_index == N_DIAMOND
        assert in_diamond.exit_medium_index == mirror.exit_medium_index
        assert with_media(mirror, exit_index=1.0).incident_medium_index == mirror.incident_medium_index
        assert stack_response(in_diamond, 603.0).R != pytest.approx(stack_response(mirror, 603.0).R)

    def test_absorbing_layer_loses_energy(self):
        """Test that an absorbing film gives R + T < 1."""
        stack = LayerStack(1.0, (Layer(100.0, 2.0 + 0.2j),), 1.46)
        response = stack_response(stack, 603.0)

        assert response.R + response.T < 1

    def test_tabulated_index(self):
        """Test that an index table is interpolated at the evaluation wavelength."""
        table = IndexTable(np.array([500.0, 700.0]), np.array([2.0, 2.2]), np.array([0.0, 0.0]))
        tabulated = LayerStack(1.0, (Layer(80.0, table),), 1.46)
        constant = LayerStack(1.0, (Layer(80.0, 2.1),), 1.46)

        assert stack_response(tabulated, 600.0).R == pytest.approx(
            stack_response(constant, 600.0).R, abs=1e-12
        )

    def test_pair_strictly_lowers_transmission(self):
        """Test that each added Bragg pair lowers T at the design wavelength."""
        transmissions = [stack_response(quarter_wave_mirror(n), 603.0).T for n in range(0, 20)]

        assert all(b < a for a, b in zip(transmissions, transmissions[1:], strict=False))


class TestFieldProfile:
    """Test suite for standing-wave profiles."""

    @pytest.mark.parametrize("seed", range(20))
    def test_continuity_at_interfaces(self, seed):
        """Test that |E|² is continuous where neighbouring regions meet."""
        stack, wavelength = random_stack(seed)
        profile = field_profile(stack, wavelength, sampling=5.0)

        repeated = np.flatnonzero(np.diff(profile.positions) == 0)
        for i in repeated:
            left, right = profile.intensity[i], profile.intensity[i + 1]
            assert abs(left - right) <= 1e-9 * max(1.0, abs(left))
        assert np.all(profile.intensity >= 0)

    def test_free_propagation_uniform(self):
        """Test that no layers and matched media give a flat profile."""
        profile = field_profile(LayerStack(1.3, (), 1.3), 603.0, sampling=10.0)

        np.testing.assert_allclose(profile.intensity, 1.0, atol=1e-12)

    def test_half_wave_slab_on_conductor(self):
        """Test that the field vanishes at a perfect reflector."""
        slab = Layer(603.0 / (2 * 1.5), 1.5)
        profile = field_profile(LayerStack(1.0, (slab,), None), 603.0, sampling=2.0)

        wall = profile.interfaces[-1]
        assert wall.position == pytest.approx(201.0)
        assert wall.intensity == pytest.approx(0.0, abs=1e-20)
        assert wall.kind == "node"

    def test_low_index_termination_antinode(self):
        """Test an antinode at the surface of a low-index-terminated mirror."""
        stack = design_bragg_mirror(70, 603.0, N_HI, N_LO, "lo", incident_index=N_DIAMOND)
        profile = field_profile(stack, 603.0, sampling=1.0)

        assert profile.interfaces[0].kind == "antinode"
        assert profile.interfaces[0].intensity == pytest.approx(4.0, rel=0.05)

    def test_high_index_termination_node(self):
        """Test a node at the surface of a high-index-terminated mirror."""
        stack = design_bragg_mirror(70, 603.0, N_HI, N_LO, "hi")
        profile = field_profile(stack, 603.0, sampling=1.0)

        assert profile.interfaces[0].kind == "node"
        assert profile.interfaces[0].intensity < 0.05 * 4

    def test_field_at_matches_profile(self):
        """Test that point evaluation agrees with the sampled profile."""
        stack = LayerStack(1.0, (Layer(862.0, N_DIAMOND),), N_LO)
        profile = field_profile(stack, 603.0, sampling=0.5)
        z = 431.0

        assert abs(field_at(stack, 603.0, z)) ** 2 == pytest.approx(
            profile.intensity_at(z), rel=1e-3
        )

    def test_rejects_non_positive_sampling(self):
        """Test that sampling must be positive."""
        with pytest.raises(InvalidArgumentError):
            field_profile(LayerStack(1.0, (), 1.0), 603.0, sampling=0.0)


class TestBraggDesign:
    """Test suite for quarter-wave mirror design."""

    def brute_force_pairs(self, target_ppm: float, termination: str) -> int:
        for pairs in range(100):
            if stack_response(quarter_wave_mirror(pairs, termination), 603.0).T <= target_ppm * 1e-6:
                return pairs
        raise AssertionError("sweep did not reach the target")

    def test_fiber_mirror_pair_count(self):
        """Test that 70 ppm needs 15 high-index-terminated pairs."""
        stack = design_bragg_mirror(70, 603.0, N_HI, N_LO, "hi")
        response = stack_response(stack, 603.0)

        assert len(stack.layers) == 2 * 15
        assert self.brute_force_pairs(70, "hi") == 15
        assert response.T <= 70e-6
        assert response.T == pytest.approx(50.35e-6, rel=1e-2)

    def test_low_termination_pair_count(self):
        """Test the minimal pair count for a low-index-terminated mirror in air."""
        stack = design_bragg_mirror(70, 603.0, N_HI, N_LO, "lo")

        assert len(stack.layers) == 2 * 16 + 1
        assert self.brute_force_pairs(70, "lo") == 16

    def test_low_termination_adds_one_layer(self):
        """Test that lo-termination prepends one low-index layer."""
        hi = bragg_layers(603.0, N_HI, N_LO, 5, "hi")
        lo = bragg_layers(603.0, N_HI, N_LO, 5, "lo")

        assert len(lo) == len(hi) + 1
        assert lo[0].refractive_index == N_LO
        assert lo[1:] == hi

    def test_unit_target_gives_zero_pairs(self):
        """Test that a 1e6 ppm target is met by the bare substrate."""
        stack = design_bragg_mirror(1e6, 603.0, N_HI, N_LO, "hi")

        assert stack.layers == ()

    def test_no_contrast_is_infeasible(self):
        """Test that equal indices raise a design-infeasible error."""
        with pytest.raises(DesignInfeasibleError):
            design_bragg_mirror(70, 603.0, 1.8, 1.8, "hi")

    def test_inverted_indices_rejected(self):
        """Test that n_hi < n_lo is an invalid argument."""
        with pytest.raises(InvalidArgumentError):
            design_bragg_mirror(70, 603.0, 1.46, 2.10, "hi")

    def test_unknown_termination_rejected(self):
        """Test that the termination must be hi or lo."""
        with pytest.raises(InvalidArgumentError):
            design_bragg_mirror(70, 603.0, N_HI, N_LO, "mid")

    def test_flat_mirror_passes_excitation(self):
        """Test the flat-mirror design: <= 70 ppm at 603 nm, T(532 nm) > 0.5."""
        design = design_dual_band_mirror(
            70, 603.0, 532.0, N_HI, N_LO, "lo", second_min_T=0.5, incident_index=N_DIAMOND
        )

        assert stack_response(design.stack, 603.0).T <= 70e-6
        assert stack_response(design.stack, 532.0).T > 0.5
        assert design.second_transmission == pytest.approx(
            stack_response(design.stack, 532.0).T
        )
        assert design.center_wavelength > 603.0

    def test_fiber_mirror_blocks_excitation(self):
        """Test the fiber-mirror design: <= 70 ppm at 603 nm, T(532 nm) < 1%."""
        design = design_dual_band_mirror(70, 603.0, 532.0, N_HI, N_LO, "hi", second_max_T=0.01)

        assert stack_response(design.stack, 603.0).T <= 70e-6
        assert stack_response(design.stack, 532.0).T < 0.01
        assert design.center_wavelength < 603.0

    def test_phase_of_centered_mirror(self):
        """Test that a centered low-terminated mirror reflects in phase."""
        stack = design_bragg_mirror(70, 603.0, N_HI, N_LO, "lo", incident_index=N_DIAMOND)
        r = stack_response(stack, 603.0).r

        assert abs(cmath.phase(r)) < 1e-9
