"""Kernel contract tests: every documented example plus the stated invariants."""

import numpy as np
import pytest

from eigsurg.errors import DimensionMismatch, RankDeficient, Singular
from eigsurg.numerics import (
    Tolerances,
    eig,
    invert,
    min_norm_right_solve,
    min_norm_solve,
    nullspace_basis,
    orthonormal_completion,
    rank,
)

TOL = Tolerances()


def test_tolerances_must_be_positive():
    with pytest.raises(ValueError):
        Tolerances(rank_rel=0.0)
    with pytest.raises(ValueError):
        Tolerances(match_abs=-1e-6)


class TestRank:
    def test_identity(self):
        assert rank(np.eye(3), TOL) == 3

    def test_zero_matrix(self):
        assert rank(np.zeros((2, 4)), TOL) == 0

    def test_dependent_rows(self):
        # second row is exactly twice the first
        assert rank(np.array([[1.0, 2.0], [2.0, 4.0]]), TOL) == 1

    def test_complex_input(self):
        assert rank(np.array([[1j, 0], [0, 1j]]), TOL) == 2

    @pytest.mark.parametrize("seed", range(5))
    def test_low_rank_products(self, seed):
        rng = np.random.default_rng(seed)
        p, q, k = 7, 5, 3
        M = rng.standard_normal((p, k)) @ rng.standard_normal((k, q))
        assert rank(M, TOL) == k


class TestNullspaceBasis:
    def test_full_column_rank_yields_no_columns(self):
        assert nullspace_basis(np.eye(2), TOL).shape == (2, 0)

    def test_row_vector(self):
        N = nullspace_basis(np.array([[1.0, 1.0]]), TOL)
        assert N.shape == (2, 1)
        # direction [1, -1]/sqrt(2), up to sign
        assert abs(N[:, 0] @ np.array([1.0, -1.0]) / np.sqrt(2)) == pytest.approx(1.0)

    def test_zero_map_spans_everything(self):
        N = nullspace_basis(np.zeros((1, 2)), TOL)
        assert N.shape == (2, 2)
        np.testing.assert_allclose(N.T @ N, np.eye(2), atol=1e-12)

    @pytest.mark.parametrize("seed", range(8))
    def test_invariants_on_random_input(self, seed):
        rng = np.random.default_rng(100 + seed)
        p = int(rng.integers(1, 7))
        q = int(rng.integers(1, 7))
        k = int(rng.integers(0, min(p, q) + 1))
        M = rng.standard_normal((p, k)) @ rng.standard_normal((k, q))
        if seed % 2:
            M = M + 1j * (rng.standard_normal((p, k)) @ rng.standard_normal((k, q)))
        N = nullspace_basis(M, TOL)
        assert N.shape[1] == q - rank(M, TOL)
        if N.shape[1]:
            assert np.linalg.norm(M @ N) <= 1e-10 * max(np.linalg.norm(M), 1e-300)
            np.testing.assert_allclose(
                N.conj().T @ N, np.eye(N.shape[1]), atol=1e-12
            )


class TestMinNormRightSolve:
    def test_identity_basis(self):
        Z = np.array([[1.0, 2.0], [3.0, 4.0]])
        np.testing.assert_allclose(min_norm_right_solve(np.eye(2), Z, TOL), Z)

    def test_zero_target(self):
        X = min_norm_right_solve(np.array([[1.0], [2.0]]), np.zeros((3, 1)), TOL)
        np.testing.assert_allclose(X, np.zeros((3, 2)), atol=1e-15)

    def test_minimality_hand_case(self):
        # X [1, -1]^T = 1 has the solution family [a, a-1]; the squared norm
        # a^2 + (a-1)^2 is minimized at a = 1/2.
        V = np.array([[1.0], [-1.0]])
        Z = np.array([[1.0]])
        X = min_norm_right_solve(V, Z, TOL)
        np.testing.assert_allclose(X, [[0.5, -0.5]], atol=1e-14)
        np.testing.assert_allclose(X @ V, [[1.0]], atol=1e-14)
        grid = np.linspace(-2.0, 3.0, 101)
        family_norms = [np.hypot(a, a - 1.0) for a in grid]
        assert np.linalg.norm(X) <= min(family_norms) + 1e-12

    def test_empty_system_gives_zero(self):
        X = min_norm_right_solve(np.zeros((3, 0)), np.zeros((2, 0)), TOL)
        np.testing.assert_allclose(X, np.zeros((2, 3)))

    def test_rank_deficient_raises(self):
        V = np.array([[1.0, 2.0], [2.0, 4.0]])
        with pytest.raises(RankDeficient):
            min_norm_right_solve(V, np.ones((1, 2)), TOL)

    def test_shape_mismatch_raises(self):
        with pytest.raises(DimensionMismatch):
            min_norm_right_solve(np.eye(2), np.ones((1, 3)), TOL)

    @pytest.mark.parametrize("seed", range(10))
    def test_residual_invariant(self, seed):
        rng = np.random.default_rng(200 + seed)
        n = int(rng.integers(2, 8))
        r = int(rng.integers(1, n + 1))
        m = int(rng.integers(1, 4))
        V = rng.standard_normal((n, r))
        if np.linalg.cond(V) > 1e6:
            pytest.skip("ill-conditioned draw")
        Z = rng.standard_normal((m, r))
        X = min_norm_right_solve(V, Z, TOL)
        assert np.linalg.norm(X @ V - Z) <= 1e-10 * (1 + np.linalg.norm(Z))


class TestEig:
    def test_diagonal(self):
        w, _ = eig(np.diag([1.0, 2.0]))
        np.testing.assert_allclose(sorted(w.real), [1.0, 2.0], atol=1e-12)
        np.testing.assert_allclose(w.imag, 0.0, atol=1e-12)

    def test_rotation_pair(self):
        # characteristic polynomial x^2 + 1
        w, _ = eig(np.array([[0.0, 1.0], [-1.0, 0.0]]))
        np.testing.assert_allclose(sorted(w, key=lambda z: z.imag), [-1j, 1j], atol=1e-12)

    def test_companion_like(self):
        # characteristic polynomial x^2 + 0.5 x - 0.5 = (x + 1)(x - 0.5)
        w, _ = eig(np.array([[0.0, 1.0], [0.5, -0.5]]))
        np.testing.assert_allclose(sorted(w.real), [-1.0, 0.5], atol=1e-12)

    def test_conjugate_pairs_adjacent_for_real_input(self):
        M = np.array([[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 2], [0, 0, -2, 0]], float)
        w, _ = eig(M)
        for i in range(0, 4, 2):
            assert w[i] == pytest.approx(w[i + 1].conjugate())

    @pytest.mark.parametrize("seed", range(6))
    def test_residual_and_normalization(self, seed):
        rng = np.random.default_rng(300 + seed)
        n = int(rng.integers(2, 8))
        M = rng.standard_normal((n, n))
        w, V = eig(M)
        for k in range(n):
            assert np.linalg.norm(V[:, k]) == pytest.approx(1.0, abs=1e-12)
            res = np.linalg.norm(M @ V[:, k] - w[k] * V[:, k])
            assert res <= 1e-10 * max(np.linalg.norm(M), 1.0)

    def test_symmetric_input_gives_real_eigenvalues(self):
        rng = np.random.default_rng(7)
        S = rng.standard_normal((6, 6))
        S = S + S.T
        w, _ = eig(S)
        assert np.max(np.abs(w.imag)) <= 1e-12 * np.linalg.norm(S)

    def test_nonsquare_raises(self):
        with pytest.raises(DimensionMismatch):
            eig(np.ones((2, 3)))


class TestOrthonormalCompletion:
    def test_standard_basis(self):
        C = orthonormal_completion(np.array([[1.0], [0.0]]), TOL)
        assert C.shape == (2, 1)
        assert abs(C[1, 0]) == pytest.approx(1.0)
        assert C[0, 0] == pytest.approx(0.0, abs=1e-14)

    def test_diagonal_direction(self):
        V = np.array([[1.0], [-1.0]]) / np.sqrt(2)
        C = orthonormal_completion(V, TOL)
        assert abs(C[:, 0] @ np.array([1.0, 1.0]) / np.sqrt(2)) == pytest.approx(1.0)

    def test_empty_completes_to_identity(self):
        np.testing.assert_allclose(orthonormal_completion(np.zeros((3, 0)), TOL), np.eye(3))

    def test_square_input_rejected(self):
        with pytest.raises(ValueError):
            orthonormal_completion(np.eye(2), TOL)

    def test_rank_deficient_raises(self):
        with pytest.raises(RankDeficient):
            orthonormal_completion(np.array([[1.0, 2.0], [2.0, 4.0], [0.0, 0.0]]), TOL)

    @pytest.mark.parametrize("seed", range(8))
    def test_invariants_on_random_input(self, seed):
        rng = np.random.default_rng(400 + seed)
        n = int(rng.integers(2, 9))
        r = int(rng.integers(1, n))
        V = rng.standard_normal((n, r))
        C = orthonormal_completion(V, TOL)
        assert C.shape == (n, n - r)
        np.testing.assert_allclose(C.T @ C, np.eye(n - r), atol=1e-12)
        assert np.linalg.norm(V.T @ C) <= 1e-10 * np.linalg.norm(V)
        assert rank(np.column_stack([V, C]), TOL) == n

    def test_near_full_random(self):
        rng = np.random.default_rng(11)
        V = rng.standard_normal((5, 4))
        C = orthonormal_completion(V, TOL)
        assert np.linalg.norm(V.T @ C) <= 1e-12 * max(np.linalg.norm(V), 1.0)


class TestInvert:
    def test_identity(self):
        np.testing.assert_allclose(invert(np.eye(3), TOL), np.eye(3))

    def test_hand_example(self):
        M = np.array([[1.0, 1.0], [-1.0, 0.0]])
        Minv = invert(M, TOL)
        np.testing.assert_allclose(Minv, [[0.0, -1.0], [1.0, 1.0]], atol=1e-14)
        np.testing.assert_allclose(M @ Minv, np.eye(2), atol=1e-14)

    def test_singular_raises(self):
        with pytest.raises(Singular):
            invert(np.array([[1.0, 1.0], [1.0, 1.0]]), TOL)

    def test_nonsquare_raises(self):
        with pytest.raises(DimensionMismatch):
            invert(np.ones((2, 3)), TOL)


def test_min_norm_solve_least_squares_vector():
    B = np.array([[0.0], [1.0]])
    z = min_norm_solve(B, np.array([0.0, 1.0]), TOL)
    np.testing.assert_allclose(z, [1.0], atol=1e-14)
    zc = min_norm_solve(B, np.array([0.0 + 0j, 1.0 - 2j]), TOL)
    np.testing.assert_allclose(zc, [1.0 - 2j], atol=1e-14)
