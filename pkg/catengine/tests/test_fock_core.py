"""
Tests for truncated Fock-space linear algebra.

These tests verify that:
1. Coherent, number and displaced number states have the closed-form amplitudes
2. The Laguerre-recurrence displacement matrix is unitary and composes correctly
3. Inner products pad mismatched cutoffs and fidelities reject unnormalized input
"""

import math

import numpy as np
import pytest

from catengine.cat_states import CatSpec, scs_vector
from catengine.errors import CutoffTooSmall, IndexOutOfRange, NotNormalized
from catengine.fock_core import (
    FockVector,
    auto_cutoff,
    coherent_superposition,
    coherent_vector,
    creation_matrix,
    displace,
    displaced_number_state,
    displacement_matrix,
    fidelity_pure,
    inner_product,
    number_state,
    sqrt_factorials,
    vacuum_projection_row,
)


class TestFockVector:
    """FockVector construction and helpers."""

    def test_cutoff_is_length_minus_one(self):
        """A vector of six amplitudes has cutoff 5."""
        assert FockVector(np.ones(6)).cutoff == 5

    def test_rejects_non_finite(self):
        """NaN amplitudes are refused at construction."""
        with pytest.raises(ValueError) as excinfo:
            FockVector([1.0, float("nan")])
        assert "finite" in str(excinfo.value)

    def test_padding_only_grows(self):
        """padded() appends zeros and refuses to truncate."""
        vector = FockVector([1.0, 0.0])
        assert vector.padded(4).amplitudes.tolist() == [1, 0, 0, 0, 0]
        with pytest.raises(ValueError):
            FockVector([1.0, 0.0, 0.0]).padded(1)

    def test_normalizing_zero_vector_fails(self):
        """The zero vector has no normalized form."""
        with pytest.raises(NotNormalized):
            FockVector(np.zeros(3)).normalized()

    def test_mean_photon_number_of_coherent_state(self):
        """<n> of |gamma> equals |gamma|^2."""
        assert coherent_vector(1.5j, 40).mean_photon_number() == pytest.approx(2.25, abs=1e-9)


class TestCutoffPolicy:
    """auto_cutoff and factorial tables."""

    def test_empty_amplitudes(self):
        """With nothing displaced the policy gives the floor of 20."""
        assert auto_cutoff() == 20

    def test_amplitude_radius(self):
        """M = 2 gives 4 + 12 + 20."""
        assert auto_cutoff([2.0, -1.0]) == 36

    def test_photons_widen_radius(self):
        """Four photons add sqrt(9) = 3 to the radius."""
        assert auto_cutoff([0.0], photons=4) == 47

    def test_sqrt_factorials(self):
        """sqrt(n!) for small n."""
        np.testing.assert_allclose(sqrt_factorials(5), np.sqrt([1, 1, 2, 6, 24, 120]))


class TestCoherentVector:
    """coherent_vector closed form and tail checks."""

    def test_zero_amplitude_is_vacuum(self):
        """gamma = 0 gives the vacuum."""
        vector = coherent_vector(0, 10)
        assert vector.amplitudes[0] == 1
        assert np.all(vector.amplitudes[1:] == 0)

    def test_vacuum_amplitude(self):
        """c_0 = exp(-|gamma|^2 / 2)."""
        assert coherent_vector(1.0, 40).amplitudes[0] == pytest.approx(math.exp(-0.5), abs=1e-12)

    def test_closed_form_amplitudes(self):
        """c_n = exp(-|g|^2/2) g^n / sqrt(n!) for a complex amplitude."""
        gamma = 0.8 - 0.6j
        vector = coherent_vector(gamma, 30)
        for n in range(10):
            expected = math.exp(-0.5) * gamma ** n / math.sqrt(math.factorial(n))
            assert vector.amplitudes[n] == pytest.approx(expected, abs=1e-13)

    def test_normalized_within_tail(self):
        """|2> at cutoff 40 is normalized within 1e-12."""
        assert coherent_vector(2.0, 40).norm() ** 2 == pytest.approx(1.0, abs=1e-12)

    def test_tail_violation(self):
        """A cutoff far below |gamma|^2 is refused with the needed cutoff in the message."""
        with pytest.raises(CutoffTooSmall) as excinfo:
            coherent_vector(3.0, 5)
        assert "cutoff 5" in str(excinfo.value)

    def test_superposition_sums_kets(self):
        """Weights multiply the individual coherent kets."""
        combined = coherent_superposition([1.0, -2.0], [0.5, -0.5j], 30)
        expected = coherent_vector(0.5, 30).amplitudes - 2.0 * coherent_vector(-0.5j, 30).amplitudes
        np.testing.assert_allclose(combined.amplitudes, expected, atol=1e-14)


class TestNumberState:
    """number_state edge cases."""

    def test_unit_amplitude(self):
        """|3> has a single unit amplitude."""
        assert number_state(3, 5).amplitudes[3] == 1

    def test_out_of_range(self):
        """k above the cutoff raises IndexOutOfRange."""
        with pytest.raises(IndexOutOfRange):
            number_state(6, 5)


class TestDisplacementMatrix:
    """Laguerre-recurrence displacement matrices."""

    def test_zero_displacement_is_identity(self):
        """D(0) = I."""
        np.testing.assert_array_equal(displacement_matrix(0, 12), np.eye(13))

    def test_vacuum_element(self):
        """<0|D(1)|0> = exp(-1/2)."""
        assert displacement_matrix(1.0, 40)[0, 0] == pytest.approx(math.exp(-0.5), abs=1e-12)

    def test_first_column_is_coherent_state(self):
        """D(alpha)|0> = |alpha>."""
        alpha = 1.1 + 0.7j
        np.testing.assert_allclose(
            displacement_matrix(alpha, 40)[:, 0], coherent_vector(alpha, 40).amplitudes, atol=1e-12
        )

    def test_row_zero_is_conjugated_coherent_state(self):
        """<0|D(alpha) = <-alpha|."""
        alpha = 0.8 - 0.5j
        np.testing.assert_allclose(
            displacement_matrix(alpha, 40)[0, :], np.conj(coherent_vector(-alpha, 40).amplitudes), atol=1e-12
        )

    def test_projection_row_matches_matrix(self):
        """vacuum_projection_row is row 0 of the matrix."""
        alpha = -1.2 + 0.3j
        np.testing.assert_allclose(vacuum_projection_row(alpha, 40), displacement_matrix(alpha, 40)[0], atol=1e-12)

    @pytest.mark.parametrize("alpha", [0.5, 1.3 - 0.4j, -2.0j, 1.4 + 1.4j])
    def test_unitarity_away_from_cutoff(self, alpha):
        """D(alpha) D(-alpha) is the identity on the leading 20x20 block.

        The product of truncated matrices only converges once the cutoff
        clears |alpha| = 2 by a wide margin, hence 60 rather than 40.
        """
        product = displacement_matrix(alpha, 60) @ displacement_matrix(-alpha, 60)
        assert np.max(np.abs(product[:20, :20] - np.eye(20))) <= 1e-8

    def test_composition_phase(self):
        """D(a) D(b) = exp(i Im(a b*)) D(a + b) on the leading block."""
        a, b = 0.7 + 0.2j, -0.3 + 0.9j
        left = displacement_matrix(a, 50) @ displacement_matrix(b, 50)
        right = np.exp(1j * (a * np.conj(b)).imag) * displacement_matrix(a + b, 50)
        assert np.max(np.abs(left[:20, :20] - right[:20, :20])) <= 1e-8

    def test_cutoff_too_small(self):
        """|alpha|^2 + 6|alpha| + 10 above the cutoff is refused."""
        with pytest.raises(CutoffTooSmall) as excinfo:
            displacement_matrix(3.0, 20)
        assert "need >= 37" in str(excinfo.value)


class TestDisplacedNumberStates:
    """Displaced number states and displace()."""

    def test_k_zero_is_coherent(self):
        """|0, alpha> = |alpha>."""
        alpha = 0.9j
        np.testing.assert_allclose(
            displaced_number_state(0, alpha, 30).amplitudes, coherent_vector(alpha, 30).amplitudes, atol=1e-12
        )

    def test_no_displacement(self):
        """|1, 0> = |1>."""
        assert displaced_number_state(1, 0, 10).amplitudes[1] == 1

    def test_orthonormal(self):
        """<j, alpha|k, alpha> = delta_jk for j, k <= 5."""
        states = [displaced_number_state(k, 1.3, 50) for k in range(6)]
        gram = np.array([[inner_product(a, b) for b in states] for a in states])
        assert np.max(np.abs(gram - np.eye(6))) <= 1e-10

    def test_index_out_of_range(self):
        """k above the cutoff raises IndexOutOfRange."""
        with pytest.raises(IndexOutOfRange):
            displaced_number_state(21, 0.1, 20)

    def test_displace_vacuum(self):
        """displace(|0>, alpha) = |alpha>, at an enlarged cutoff."""
        shifted = displace(number_state(0, 5), 1.0 - 1.0j, 40)
        assert shifted.cutoff == 40
        np.testing.assert_allclose(shifted.amplitudes, coherent_vector(1.0 - 1.0j, 40).amplitudes, atol=1e-12)

    def test_creation_matrix(self):
        """a^dagger|1> = sqrt(2)|2>."""
        raised = creation_matrix(4) @ number_state(1, 4).amplitudes
        assert raised[2] == pytest.approx(math.sqrt(2.0))
        assert np.count_nonzero(raised) == 1


class TestInnerProductAndFidelity:
    """inner_product and fidelity_pure."""

    def test_self_overlap(self):
        """<a|a> = 1 for a normalized state."""
        vector = coherent_vector(0.4, 20)
        assert inner_product(vector, vector) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal_basis_kets(self):
        """<0|1> = 0, with mismatched cutoffs padded."""
        assert inner_product(number_state(0, 3), number_state(1, 8)) == 0

    def test_cat_parities_orthogonal(self):
        """<beta_-|beta_+> = 0 for beta = 2."""
        even = scs_vector(CatSpec(2.0, "even"))
        odd = scs_vector(CatSpec(2.0, "odd"))
        assert abs(inner_product(odd, even)) <= 1e-10

    def test_fidelity_extremes(self):
        """Identical states give 1, |0> against |1> gives 0."""
        vector = coherent_vector(0.3j, 20)
        assert fidelity_pure(vector, vector) == pytest.approx(1.0, abs=1e-12)
        assert fidelity_pure(number_state(0, 4), number_state(1, 4)) == 0.0

    def test_fidelity_global_phase_and_symmetry(self):
        """Global phases drop out and the arguments commute."""
        a = coherent_vector(0.5, 30)
        b = FockVector(np.exp(0.7j) * coherent_vector(0.6 + 0.1j, 30).amplitudes)
        assert fidelity_pure(a, b) == pytest.approx(fidelity_pure(b, a), abs=1e-14)
        assert fidelity_pure(a, b) == pytest.approx(abs(inner_product(a, coherent_vector(0.6 + 0.1j, 30))) ** 2)

    def test_even_cat_against_coherent_state(self):
        """|<2|beta_+>|^2 = (1 + exp(-8)) / 2 from the Gaussian overlap."""
        cat = scs_vector(CatSpec(2.0, "even"), 40)
        expected = (1.0 + math.exp(-8.0)) / 2.0
        assert fidelity_pure(cat, coherent_vector(2.0, 40)) == pytest.approx(expected, abs=1e-10)

    def test_rejects_unnormalized(self):
        """A state of norm 2 is refused."""
        with pytest.raises(NotNormalized) as excinfo:
            fidelity_pure(FockVector([2.0]), FockVector([1.0]))
        assert "first state" in str(excinfo.value)
