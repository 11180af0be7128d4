"""
Tests del núcleo de operadores: estados, efectos y álgebra lineal.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from config.settings import Tolerances
from repository.operators import (
    Effect,
    HilbertSpace,
    StateVector,
    canonical_phase,
    commutator_norm,
    maximizing_state,
    min_eigenvalue,
    operator_norm,
    rank_one_difference_norm,
    spectral_norm,
    tree_sum,
)
from utils.exceptions import NoMaximizerError, RejectedInputError

DIM = 4

complex_parts = arrays(
    np.float64,
    (2, DIM, DIM),
    elements=st.floats(min_value=-1.0, max_value=1.0, allow_nan=False, allow_infinity=False, allow_subnormal=False),
)


def _effect_from_parts(parts):
    """Efecto B B† / (1 + ‖B B†‖) a partir de partes real e imaginaria."""
    b = parts[0] + 1j * parts[1]
    positive = b @ b.conj().T
    return positive / (1.0 + np.linalg.norm(positive, ord=2))


class TestStateVector:
    """Tests para vectores de estado."""

    def test_from_amplitudes_normalizes(self):
        state = StateVector.from_amplitudes([3.0, 4.0])
        assert np.allclose(state.amplitudes, [0.6, 0.8])
        assert state.dim == 2

    def test_rejects_non_unit_vector(self):
        with pytest.raises(RejectedInputError) as exc:
            StateVector(np.array([1.0, 1.0], dtype=np.complex128))
        assert exc.value.reason == "not_normalized"

    def test_rejects_zero_vector(self):
        with pytest.raises(RejectedInputError):
            StateVector.from_amplitudes([0.0, 0.0])

    def test_expectation_and_pairs(self):
        state = StateVector.from_amplitudes([1.0, 1.0j])
        assert state.expectation(np.eye(2)) == pytest.approx(1.0)
        assert state.to_pairs()[1] == pytest.approx([0.0, 1.0 / np.sqrt(2.0)])

    def test_hilbert_space_bounds(self):
        with pytest.raises(RejectedInputError):
            HilbertSpace(0)
        with pytest.raises(RejectedInputError) as exc:
            HilbertSpace(257)
        assert exc.value.reason == "dimension_too_large"
        with pytest.raises(RejectedInputError):
            HilbertSpace(3).basis_vector(3)

    def test_canonical_phase(self):
        rotated = canonical_phase(np.array([0.0, 1j, 1.0]))
        assert rotated[1] == pytest.approx(1.0)
        assert rotated[2] == pytest.approx(-1j)


class TestEffect:
    """Tests para la certificación de efectos."""

    def test_rejects_non_hermitian(self):
        with pytest.raises(RejectedInputError) as exc:
            Effect.from_matrix([[0.0, 1.0], [0.0, 0.0]])
        assert exc.value.reason == "non_hermitian"

    def test_rejects_negative(self):
        with pytest.raises(RejectedInputError) as exc:
            Effect.from_matrix(np.diag([-0.1, 0.5]))
        assert exc.value.reason == "not_positive"

    def test_rejects_above_identity(self):
        with pytest.raises(RejectedInputError) as exc:
            Effect.from_matrix(np.diag([1.5, 0.0]))
        assert exc.value.reason == "exceeds_identity"

    def test_upper_slack_admits_defect(self):
        effect = Effect.from_matrix(np.diag([1.0 + 1e-6, 0.0]), upper_slack=1e-5)
        assert effect.eigen_range[1] == pytest.approx(1.0 + 1e-6)

    def test_rank_one(self):
        effect = Effect.rank_one(0.5, [1.0, 1.0])
        assert effect.is_rank_one
        assert spectral_norm(effect) == pytest.approx(1.0)
        assert np.allclose(effect.matrix, 0.5 * np.ones((2, 2)))
        with pytest.raises(RejectedInputError):
            Effect.rank_one(1.0, [1.0, 1.0])
        with pytest.raises(RejectedInputError):
            Effect.rank_one(-0.1, [1.0, 0.0])

    def test_zero_effect(self):
        zero = Effect.zero(3)
        assert spectral_norm(zero) == 0.0
        with pytest.raises(NoMaximizerError):
            maximizing_state(zero)


class TestLinearAlgebra:
    """Tests de normas, conmutadores y estados maximizantes."""

    def test_spectral_norm_of_diagonal(self):
        assert spectral_norm(np.diag([0.8, 0.3])) == pytest.approx(0.8)
        assert min_eigenvalue(np.diag([0.8, 0.3])) == pytest.approx(0.3)

    def test_maximizing_state_tie_break(self):
        state, value = maximizing_state(np.eye(2) / 2.0)
        assert np.allclose(state.amplitudes, [1.0, 0.0])
        assert value == pytest.approx(0.5)

    def test_maximizing_state_zero_operator(self):
        with pytest.raises(NoMaximizerError):
            maximizing_state(np.zeros((2, 2)))

    def test_operator_norm_general_matrix(self):
        assert operator_norm(np.array([[0.0, 1.0], [0.0, 0.0]])) == pytest.approx(1.0)

    def test_commutator_of_paulis(self):
        x = np.array([[0.0, 1.0], [1.0, 0.0]])
        z = np.diag([1.0, -1.0])
        assert commutator_norm(x, z) == pytest.approx(2.0)
        with pytest.raises(RejectedInputError):
            commutator_norm(x, np.eye(3))

    def test_tree_sum_matches_sum(self, rng):
        stack = rng.standard_normal((7, 3, 3)) + 1j * rng.standard_normal((7, 3, 3))
        assert np.max(np.abs(tree_sum(stack) - stack.sum(axis=0))) <= 1e-13
        assert np.all(tree_sum(np.zeros((0, 2, 2))) == 0.0)

    def test_rank_one_difference_norm(self):
        u = np.array([[1.0, 0.0]], dtype=np.complex128)
        v = np.array([[0.0, 1.0]], dtype=np.complex128)
        assert rank_one_difference_norm([0.5], u, [0.3], v)[0] == pytest.approx(0.5)
        same = rank_one_difference_norm([0.25], u * np.exp(0.3j), [0.25], u)
        assert same[0] <= 1e-15

    def test_tolerance_override_changes_hermiticity_check(self):
        loose = Tolerances(hermiticity=1e-3)
        matrix = np.array([[0.5, 1e-5], [0.0, 0.5]])
        with pytest.raises(RejectedInputError):
            spectral_norm(matrix)
        assert spectral_norm(matrix, loose) == pytest.approx(0.5, abs=1e-4)


class TestOperatorProperties:
    """Propiedades sobre efectos aleatorios."""

    @settings(max_examples=50, deadline=None)
    @given(parts=complex_parts)
    def test_maximizing_state_attains_norm(self, parts):
        effect = _effect_from_parts(parts)
        norm = spectral_norm(effect)
        assert 0.0 <= norm <= 1.0
        assert norm == pytest.approx(float(np.linalg.eigvalsh(effect)[-1]), abs=1e-12)
        if norm > 1e-12:
            state, value = maximizing_state(effect)
            assert abs(np.linalg.norm(state.amplitudes) - 1.0) <= 1e-12
            assert value == pytest.approx(norm, abs=1e-9)

    @settings(max_examples=50, deadline=None)
    @given(parts=complex_parts)
    def test_effect_certification_bounds(self, parts):
        effect = Effect.from_matrix(_effect_from_parts(parts))
        low, high = effect.eigen_range
        assert low >= -1e-10
        assert high <= 1.0 + 1e-10
        assert effect.hermiticity_defect <= 1e-10

    @settings(max_examples=50, deadline=None)
    @given(
        a=arrays(np.float64, (2, DIM), elements=st.floats(min_value=-1.0, max_value=1.0, allow_subnormal=False)),
        b=arrays(np.float64, (2, DIM), elements=st.floats(min_value=-1.0, max_value=1.0, allow_subnormal=False)),
        weights=st.tuples(st.floats(min_value=0.0, max_value=1.0), st.floats(min_value=0.0, max_value=1.0)),
    )
    def test_rank_one_difference_matches_dense(self, a, b, weights):
        u = a[0] + 1j * a[1]
        v = b[0] + 1j * b[1]
        w1, w2 = weights
        dense = w1 * np.outer(u, u.conj()) - w2 * np.outer(v, v.conj())
        exact = rank_one_difference_norm(np.array([w1]), u[None, :], np.array([w2]), v[None, :])[0]
        scale = 1.0 + w1 * np.vdot(u, u).real + w2 * np.vdot(v, v).real
        assert exact == pytest.approx(np.linalg.norm(dense, ord=2), abs=1e-10 * scale)
