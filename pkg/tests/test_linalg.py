import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from berrynet.circuits import h4
from berrynet.linalg import (
    MatrixSizeError,
    ShapeError,
    equal_up_to_diagonal_phases,
    equal_up_to_global_phase,
    haar_unitary,
    is_unitary,
    permanent,
    submatrix_with_repetition,
)
from oracles import permanent_naive


class TestIsUnitary:
    def test_identity(self):
        assert is_unitary(np.eye(4), 1e-12)

    def test_h4_family(self):
        assert is_unitary(h4(1.3), 1e-12)

    def test_all_ones_is_not(self):
        assert not is_unitary(np.ones((2, 2)))

    def test_non_square_raises(self):
        with pytest.raises(ShapeError):
            is_unitary(np.ones((2, 3)))


class TestPermanent:
    @pytest.mark.parametrize("n", range(1, 9))
    def test_identity(self, n):
        assert permanent(np.eye(n)) == pytest.approx(1.0)

    def test_empty_matrix_is_one(self):
        assert permanent(np.zeros((0, 0))) == pytest.approx(1.0)

    def test_two_by_two_definition(self):
        a, b, c, d = 1.5 + 0.5j, -0.25j, 2.0, 0.75 - 1.0j
        assert permanent([[a, b], [c, d]]) == pytest.approx(a * d + b * c)

    def test_all_ones_3x3(self):
        # n! for the all-ones matrix; the naive oracle is the derivation
        assert permanent_naive(np.ones((3, 3))) == pytest.approx(6.0)
        assert permanent(np.ones((3, 3))) == pytest.approx(6.0)

    @pytest.mark.parametrize("n", range(1, 9))
    def test_matches_naive_oracle(self, n):
        rng = np.random.default_rng(100 + n)
        for _ in range(5):
            r = rng.uniform(0, 1, (n, n))
            phi = rng.uniform(0, 2 * np.pi, (n, n))
            m = r * np.exp(1j * phi)
            assert abs(permanent(m) - permanent_naive(m)) <= 1e-9

    @pytest.mark.parametrize("n", range(2, 7))
    def test_zero_row_gives_zero(self, n):
        rng = np.random.default_rng(7 * n)
        m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        m[n // 2, :] = 0.0
        assert abs(permanent(m)) <= 1e-12

    def test_non_square_raises(self):
        with pytest.raises(ShapeError):
            permanent(np.ones((2, 3)))

    def test_size_cap(self):
        with pytest.raises(MatrixSizeError):
            permanent(np.eye(31))

    def test_nan_rejected(self):
        m = np.eye(2, dtype=complex)
        m[0, 0] = np.nan
        with pytest.raises(ValueError):
            permanent(m)


class TestSubmatrixWithRepetition:
    def setup_method(self):
        self.m = np.arange(16, dtype=float).reshape(4, 4) + 0j

    def test_plain_selection(self):
        sub = submatrix_with_repetition(self.m, (1, 0, 1, 0), (1, 1, 0, 0))
        expected = np.array([[self.m[0, 0], self.m[0, 1]], [self.m[2, 0], self.m[2, 1]]])
        assert np.array_equal(sub, expected)

    def test_repetition(self):
        sub = submatrix_with_repetition(self.m, (2, 0, 0, 0), (1, 1, 0, 0))
        expected = np.array([[self.m[0, 0], self.m[0, 1]], [self.m[0, 0], self.m[0, 1]]])
        assert np.array_equal(sub, expected)

    def test_empty_selection_permanent_one(self):
        sub = submatrix_with_repetition(self.m, (0, 0, 0, 0), (0, 0, 0, 0))
        assert sub.shape == (0, 0)
        assert permanent(sub) == pytest.approx(1.0)

    def test_mismatched_totals_raise(self):
        with pytest.raises(ShapeError):
            submatrix_with_repetition(self.m, (1, 0, 0, 0), (1, 1, 0, 0))


class TestGlobalPhaseEquality:
    def test_global_i(self):
        a = h4(0.4)
        assert equal_up_to_global_phase(a, 1j * a, 1e-12)

    def test_perturbation_detected(self):
        a = h4(0.4)
        b = a.copy()
        b[2, 3] += 1e-8 * 10
        assert not equal_up_to_global_phase(a, b, 1e-9)

    def test_ix_equals_x(self):
        x = np.array([[0, 1], [1, 0]], dtype=complex)
        assert equal_up_to_global_phase(1j * x, x, 1e-12)


class TestDiagonalPhaseEquality:
    def test_constructed_equivalence(self):
        rng = np.random.default_rng(5)
        for theta in (0.0, 0.9, 2.4):
            base = h4(theta)
            d1 = np.exp(1j * rng.uniform(0, 2 * np.pi, 4))
            d2 = np.exp(1j * rng.uniform(0, 2 * np.pi, 4))
            assert equal_up_to_diagonal_phases(d1[:, None] * base * d2[None, :], base, 1e-9)

    def test_theta_not_removable(self):
        assert not equal_up_to_diagonal_phases(h4(0.0), h4(np.pi / 2), 1e-9)

    def test_zero_pattern_mismatch(self):
        eye = np.eye(2, dtype=complex)
        x = np.array([[0, 1], [1, 0]], dtype=complex)
        assert not equal_up_to_diagonal_phases(eye, x, 1e-9)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(min_value=0, max_value=2**32 - 1))
    def test_reflexive_and_symmetric_without_zeros(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 5))
        a = rng.uniform(0.3, 1.5, (n, n)) * np.exp(1j * rng.uniform(0, 2 * np.pi, (n, n)))
        d1 = np.exp(1j * rng.uniform(0, 2 * np.pi, n))
        d2 = np.exp(1j * rng.uniform(0, 2 * np.pi, n))
        b = d1[:, None] * a * d2[None, :]
        assert equal_up_to_diagonal_phases(a, a, 1e-9)
        assert equal_up_to_diagonal_phases(a, b, 1e-9)
        assert equal_up_to_diagonal_phases(b, a, 1e-9)


def test_haar_unitary_is_unitary():
    rng = np.random.default_rng(11)
    for n in (2, 4, 7):
        assert is_unitary(haar_unitary(n, rng), 1e-9)
