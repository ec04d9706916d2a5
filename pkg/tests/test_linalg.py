import math

import numpy as np
import pytest

from tscert.errors import LinAlgError, NotSPDError
from tscert.linalg import (
    eig_sym,
    is_spd,
    kron,
    mat,
    min_eig,
    solve_spd,
    sym_mat,
    symmetric_part,
)

A1 = np.array([[0.0, 1.0], [-2.0, -1.0]])
J2 = np.array([[0.5, 0.0], [-0.5, 0.0]])


class TestMat:
    def test_from_nested_lists(self):
        m = mat([[1, 2], [3, 4]])
        assert m.shape == (2, 2)
        assert m.dtype == np.float64
        assert np.array_equal(m, [[1.0, 2.0], [3.0, 4.0]])

    def test_shape_enforced(self):
        with pytest.raises(LinAlgError):
            mat([[1, 2], [3, 4]], rows=3, cols=2)

    def test_ragged_rejected(self):
        with pytest.raises(LinAlgError):
            mat([[1, 2], [3]])

    def test_non_finite_rejected(self):
        with pytest.raises(LinAlgError):
            mat([[1.0, float("nan")], [0.0, 1.0]])
        with pytest.raises(LinAlgError):
            mat([[float("inf")]])

    def test_copies_input(self):
        src = np.eye(2)
        m = mat(src)
        m[0, 0] = 5.0
        assert src[0, 0] == 1.0


class TestSymMat:
    def test_symmetrizes_roundoff(self):
        s = np.array([[1.0, 2.0 + 1e-13], [2.0, 3.0]])
        out = sym_mat(s)
        assert np.array_equal(out, out.T)

    def test_rejects_genuine_asymmetry(self):
        with pytest.raises(LinAlgError):
            sym_mat(np.array([[1.0, 2.0], [-2.0, 1.0]]))

    def test_rejects_non_square(self):
        with pytest.raises(LinAlgError):
            sym_mat(np.zeros((2, 3)))


class TestKron:
    def test_identity_left_factor_is_block_diagonal(self):
        out = kron(np.eye(2), A1)
        expected = np.zeros((4, 4))
        expected[:2, :2] = A1
        expected[2:, 2:] = A1
        assert np.array_equal(out, expected)

    def test_structured_left_factor_layout(self):
        # kron(J2, I2): (1,1)-block 0.5*I, (2,1)-block -0.5*I, right half zero
        out = kron(J2, np.eye(2))
        assert np.array_equal(out[:2, :2], 0.5 * np.eye(2))
        assert np.array_equal(out[2:, :2], -0.5 * np.eye(2))
        assert np.array_equal(out[:, 2:], np.zeros((4, 2)))

    def test_scalar_identity_factor(self):
        b = np.array([[1.0, 2.0], [3.0, 4.0]])
        assert np.array_equal(kron(np.eye(1), b), b)

    def test_mixed_product_property(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            a = rng.standard_normal((2, 3))
            b = rng.standard_normal((3, 2))
            c = rng.standard_normal((3, 2))
            d = rng.standard_normal((2, 4))
            lhs = kron(a, b) @ kron(c, d)
            rhs = kron(a @ c, b @ d)
            assert np.max(np.abs(lhs - rhs)) <= 1e-10

    def test_size_guard(self):
        with pytest.raises(LinAlgError):
            kron(np.zeros((1, 2**11)), np.zeros((1, 2**10)))


class TestEigSym:
    def test_identity(self):
        assert np.allclose(eig_sym(np.eye(3)), [1.0, 1.0, 1.0], atol=1e-14)

    def test_symmetric_part_of_vertex(self):
        w = eig_sym(symmetric_part(A1))
        expected = [(-1 - math.sqrt(2)) / 2, (-1 + math.sqrt(2)) / 2]
        assert np.allclose(w, expected, atol=1e-12)

    def test_sorted_ascending(self):
        assert np.allclose(eig_sym(np.diag([2.0, -3.0])), [-3.0, 2.0], atol=1e-14)

    def test_rejects_asymmetric_input(self):
        with pytest.raises(LinAlgError):
            eig_sym(A1)

    def test_min_eig(self):
        assert abs(min_eig(np.diag([4.0, -1.0, 2.0])) - (-1.0)) <= 1e-14

    def test_trace_equals_eigenvalue_sum(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            s = rng.standard_normal((5, 5))
            s = s + s.T
            w = eig_sym(s)
            assert abs(w.sum() - np.trace(s)) <= 1e-9 * max(1.0, abs(np.trace(s)))

    def test_recovers_planted_spectrum(self):
        rng = np.random.default_rng(13)
        for _ in range(10):
            d = np.sort(rng.uniform(-5.0, 5.0, size=4))
            q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
            s = q @ np.diag(d) @ q.T
            assert np.max(np.abs(eig_sym(sym_mat(s, rtol=1e-6)) - d)) <= 1e-8


class TestSolveSPD:
    def test_identity(self):
        b = np.array([3.0, -1.0])
        assert np.allclose(solve_spd(np.eye(2), b), b, atol=1e-15)

    def test_diagonal(self):
        out = solve_spd(np.diag([2.0, 4.0]), np.array([1.0, 1.0]))
        assert np.allclose(out, [0.5, 0.25], atol=1e-15)

    def test_random_spd_residual(self):
        rng = np.random.default_rng(17)
        for _ in range(10):
            g = rng.standard_normal((6, 6))
            s = g @ g.T + 6 * np.eye(6)
            b = rng.standard_normal(6)
            x = solve_spd(s, b)
            assert np.linalg.norm(s @ x - b) <= 1e-10 * np.linalg.norm(b)

    def test_matrix_rhs(self):
        s = np.diag([1.0, 2.0])
        rhs = np.eye(2)
        inv = solve_spd(s, rhs)
        assert np.allclose(inv, np.diag([1.0, 0.5]), atol=1e-15)

    def test_indefinite_rejected(self):
        with pytest.raises(NotSPDError):
            solve_spd(np.diag([1.0, -1.0]), np.array([1.0, 1.0]))


class TestIsSPD:
    def test_spd(self):
        assert is_spd(np.eye(2))

    def test_indefinite(self):
        assert not is_spd(np.diag([1.0, -1.0]))

    def test_shift(self):
        # 0.5*I is PD but not PD-after-shift by 1
        assert is_spd(0.5 * np.eye(2))
        assert not is_spd(0.5 * np.eye(2), shift=1.0)
