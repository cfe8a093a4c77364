import itertools

import numpy as np
import pytest

from conftest import PI_LATTICE, PI_S, PI_SEPARABLE, PI_THETA
from symgabor.errors import DimensionMismatch, NonInvertible, TooLarge
from symgabor.symplectic import (
    Generator,
    adjoint_form_involution,
    adjoint_matrix,
    covolume,
    is_symplectic,
    pfaffian,
    pfaffian_of_j,
    random_symplectic,
    same_lattice,
    standard_j,
    symplectic_form_of,
    symplectic_residual,
    symplectically_related,
    word_matrix,
)


def brute_pfaffian(M):
    """Pfaffian from the permutation-sum definition, an oracle independent of the recursion."""
    n = M.shape[0]
    m = n // 2
    total = 0.0
    for perm in itertools.permutations(range(n)):
        if any(perm[2 * i] > perm[2 * i + 1] for i in range(m)):
            continue
        if any(perm[2 * i] > perm[2 * i + 2] for i in range(m - 1)):
            continue
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        term = (-1) ** inv
        for i in range(m):
            term *= M[perm[2 * i], perm[2 * i + 1]]
        total += term
    return total


def random_antisym(rng, n):
    M = rng.standard_normal((n, n))
    return M - M.T


class TestStandardJ:
    def test_d1(self):
        assert np.array_equal(standard_j(1), [[0, 1], [-1, 0]])

    def test_d2_blocks(self):
        J = standard_j(2)
        assert np.array_equal(J[:2, 2:], np.eye(2))
        assert np.array_equal(J[2:, :2], -np.eye(2))
        assert not J[:2, :2].any() and not J[2:, 2:].any()

    @pytest.mark.parametrize("d", [1, 2, 3, 4])
    def test_square_and_transpose(self, d):
        J = standard_j(d)
        assert np.array_equal(J @ J, -np.eye(2 * d))
        assert np.array_equal(J.T, -J)

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            standard_j(0)


class TestForm:
    def test_diag(self):
        a, b = 1.5, -0.25
        assert np.allclose(symplectic_form_of(np.diag([a, b])), [[0, a * b], [-a * b, 0]], atol=0)

    def test_identity_gives_j(self):
        assert np.array_equal(symplectic_form_of(np.eye(4)), standard_j(2))

    def test_pi_lattice(self):
        assert np.max(np.abs(symplectic_form_of(PI_LATTICE) - PI_THETA)) <= 1e-12

    def test_singular(self):
        with pytest.raises(NonInvertible):
            symplectic_form_of(np.array([[1.0, 2.0], [2.0, 4.0]]))

    def test_antisymmetric(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            th = symplectic_form_of(rng.standard_normal((6, 6)))
            assert np.max(np.abs(th + th.T)) <= 1e-12


class TestIsSymplectic:
    def test_j(self):
        assert is_symplectic(standard_j(3))

    def test_pi_s(self):
        assert is_symplectic(PI_S)
        assert symplectic_residual(PI_S) <= 1e-12

    def test_scaling_is_not(self):
        assert not is_symplectic(2 * np.eye(2))

    def test_dimension(self):
        with pytest.raises(DimensionMismatch):
            is_symplectic(np.eye(3))

    def test_random_words(self):
        for seed in range(20):
            S = random_symplectic(2, seed, 6)
            assert is_symplectic(S, 1e-10 * max(1.0, np.abs(S).max()) ** 2)
            assert abs(abs(np.linalg.det(S)) - 1) <= 1e-9 * max(1.0, np.abs(S).max()) ** 4


class TestPfaffian:
    def test_d2_formula(self):
        a, b, c, d, e, f = 0.3, -1.2, 2.0, 0.7, -0.4, 1.1
        th = np.array([[0, a, b, c], [-a, 0, d, e], [-b, -d, 0, f], [-c, -e, -f, 0]])
        assert pfaffian(th) == pytest.approx(a * f - b * e + c * d, abs=1e-15)

    def test_pi_theta(self):
        # a = 0, b = 1/3, c = 1, d = 1, e = 1/2, f = 0: af - be + cd = 5/6
        assert pfaffian(PI_THETA) == pytest.approx(5 / 6, abs=1e-15)

    def test_d1(self):
        assert pfaffian(np.array([[0, 2.5], [-2.5, 0]])) == 2.5

    @pytest.mark.parametrize("n", [2, 4, 6])
    def test_against_permutation_sum(self, n):
        rng = np.random.default_rng(n)
        for _ in range(5):
            M = random_antisym(rng, n)
            assert pfaffian(M) == pytest.approx(brute_pfaffian(M), rel=1e-12, abs=1e-12)

    def test_too_large(self):
        with pytest.raises(TooLarge):
            pfaffian(standard_j(5))

    @pytest.mark.parametrize("d", [1, 2, 3, 4])
    def test_sign_of_j(self, d):
        assert pfaffian(standard_j(d)) == pfaffian_of_j(d) == (-1) ** (d * (d - 1) // 2)


class TestCovolumeAdjoint:
    def test_covolume(self):
        assert covolume(np.eye(4)) == 1.0
        assert covolume(np.diag([2.0, -0.75])) == pytest.approx(1.5)
        assert covolume(PI_LATTICE) == pytest.approx(5 / 6, rel=1e-12)

    def test_adjoint_identity(self):
        assert np.array_equal(adjoint_matrix(np.eye(2)), -standard_j(1))

    def test_adjoint_diag(self):
        a, b = 2.0, 0.5
        assert np.allclose(adjoint_matrix(np.diag([a, b])), [[0, -1 / b], [1 / a, 0]])

    def test_double_adjoint(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            A = rng.standard_normal((4, 4))
            assert np.allclose(adjoint_matrix(adjoint_matrix(A)), -A, rtol=0, atol=1e-9 * np.abs(A).max())

    def test_adjoint_covolume(self):
        A = np.random.default_rng(3).standard_normal((4, 4))
        assert covolume(adjoint_matrix(A)) == pytest.approx(1 / covolume(A))

    def test_adjoint_form(self):
        Ad = adjoint_matrix(PI_LATTICE)
        assert np.allclose(symplectic_form_of(Ad), -np.linalg.inv(PI_THETA), atol=1e-10)

    def test_involution(self):
        assert np.allclose(adjoint_form_involution(standard_j(2)), standard_j(2))
        rng = np.random.default_rng(11)
        for _ in range(20):
            th = random_antisym(rng, 4)
            assert np.allclose(adjoint_form_involution(adjoint_form_involution(th)), th, atol=1e-9)

    def test_involution_singular(self):
        with pytest.raises(NonInvertible):
            adjoint_form_involution(np.zeros((2, 2)))


class TestLatticeRelations:
    def test_same_lattice_unimodular(self):
        A = np.random.default_rng(2).standard_normal((4, 4))
        M = np.array([[1, 1, 0, 0], [0, 1, 0, 0], [0, 0, 1, -2], [0, 0, 0, 1]], dtype=float)
        assert same_lattice(A, A @ M)
        P = np.eye(4)[[2, 0, 3, 1]]
        assert same_lattice(A, A @ P)

    def test_same_lattice_scaled(self):
        assert not same_lattice(np.eye(2), 2 * np.eye(2))

    def test_same_lattice_dims(self):
        with pytest.raises(DimensionMismatch):
            same_lattice(np.eye(2), np.eye(4))

    def test_related_golden(self):
        # symplectically_related returns S with second = S @ first
        S = symplectically_related(PI_SEPARABLE, PI_LATTICE)
        assert S is not None
        assert np.max(np.abs(S - PI_S)) <= 1e-12

    def test_related_self(self):
        A = np.random.default_rng(4).standard_normal((4, 4))
        assert np.allclose(symplectically_related(A, A), np.eye(4))

    def test_related_recovers(self):
        rng = np.random.default_rng(5)
        for seed in range(10):
            A = rng.standard_normal((4, 4))
            S0 = random_symplectic(2, seed, 4)
            S = symplectically_related(A, S0 @ A, tol=1e-8 * max(1.0, np.abs(S0).max()) ** 2)
            assert S is not None
            assert np.allclose(S, S0, atol=1e-8 * np.abs(S0).max())

    def test_related_empty(self):
        assert symplectically_related(np.eye(2), np.diag([1.0, 2.0])) is None


class TestRandomWords:
    def test_length_zero_is_identity(self):
        assert np.array_equal(random_symplectic(2, 0, 0), np.eye(4))

    def test_deterministic(self):
        assert np.array_equal(random_symplectic(2, 42, 5), random_symplectic(2, 42, 5))

    def test_word_order(self):
        V = Generator.chirp([[1.0]])
        M = Generator.dilation([[2.0]])
        assert np.allclose(word_matrix([V, M], 1), V.matrix() @ M.matrix())
