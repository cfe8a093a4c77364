import math

import numpy as np
import pytest

from conftest import DIAGK_LATTICE, diagk_closed_form, load
from symgabor.errors import NotDiagonalK, NotPositiveDefinite, NotSymplectic, ZeroDEntry, ZeroEntry
from symgabor.gaussian import (
    GaussianAtom,
    frame_set_transform,
    gaussian_atom_samples,
    gaussian_frame_params,
    lsw_criterion,
    pipeline_matrix,
    pre_iwasawa,
    spd_sqrt,
    standard_gaussian,
)
from symgabor.metaplectic import apply_generator
from symgabor.symplectic import (
    Generator,
    chirp_matrix,
    dilation_matrix,
    is_symplectic,
    random_symplectic,
    standard_j,
)


def random_spd(rng, d):
    M = rng.standard_normal((d, d))
    return M @ M.T + 0.5 * np.eye(d)


def random_valid_lattice(seed, d=2):
    """S0 ((I, 0), (0, K)) with diagonal K: a lattice with diagonal form block."""
    rng = np.random.default_rng(seed)
    k = rng.uniform(0.2, 1.5, d) * rng.choice([-1, 1], d)
    B = np.block([[np.eye(d), np.zeros((d, d))], [np.zeros((d, d)), np.diag(k)]])
    S0 = random_symplectic(d, seed, 4, p_bound=1.0, l_bound=1.5, det_range=(0.5, 2.0))
    dv = rng.uniform(0.5, 2.0, d) * rng.choice([-1, 1], d)
    return S0 @ B, dv


class TestSamples:
    def test_origin_value(self, grid1):
        g0 = standard_gaussian(1, grid1)
        assert g0.values[grid1.n // 2] == pytest.approx(2 ** 0.25, abs=0)

    def test_even(self, grid1):
        v = standard_gaussian(1, grid1).values
        assert np.array_equal(v[1:], v[1:][::-1])

    @pytest.mark.parametrize("d", [1, 2])
    def test_norm(self, d, request):
        grid = request.getfixturevalue(f"grid{d}")
        assert standard_gaussian(d, grid).norm() == pytest.approx(1.0, abs=1e-10)

    def test_atom_standard(self, grid2):
        a = gaussian_atom_samples(GaussianAtom.standard(2), grid2)
        assert np.allclose(a.values, standard_gaussian(2, grid2).values, atol=1e-15)

    def test_diagk_atom_closed_form(self, grid2):
        res = gaussian_frame_params(DIAGK_LATTICE, [1.0, 1.0])
        g = gaussian_atom_samples(res.atom(), grid2)
        t0, t1 = grid2.mesh()
        Z = np.array([[(1 - 47j) / 10, -1j], [-1j, (3 - 149j) / 30]])
        C = 2 ** 0.5 * np.linalg.det(res.x_mat) ** 0.25
        want = C * np.exp(-math.pi * (Z[0, 0] * t0 ** 2 + 2 * Z[0, 1] * t0 * t1 + Z[1, 1] * t1 ** 2))
        assert np.max(np.abs(g.values - want)) <= 1e-12

    def test_metaplectic_path(self, grid1):
        X, Y = np.array([[0.6]]), np.array([[0.9]])
        via = apply_generator(Generator.chirp(Y),
                              apply_generator(Generator.dilation(spd_sqrt(X)), standard_gaussian(1, grid1)))
        direct = gaussian_atom_samples(GaussianAtom(X, Y), grid1)
        assert (via - direct).norm() <= 1e-6

    def test_not_pd(self):
        with pytest.raises(NotPositiveDefinite):
            GaussianAtom(np.array([[1.0, 0], [0, -1.0]]), np.zeros((2, 2)))

    def test_carrier(self, grid1):
        at = GaussianAtom([[1.0]], [[3.0]])
        a = gaussian_atom_samples(at, grid1, carrier=True)
        assert np.allclose(a.materialize().values, gaussian_atom_samples(at, grid1).values, atol=1e-15)


class TestTransforms:
    def test_standard(self):
        assert np.allclose(frame_set_transform(GaussianAtom.standard(2)), np.eye(4))

    def test_scalar(self):
        assert np.allclose(frame_set_transform(GaussianAtom([[4.0]], [[0.0]])), np.diag([0.5, 2.0]))

    def test_product(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            X = random_spd(rng, 2)
            Y = rng.standard_normal((2, 2))
            Y = Y + Y.T
            S = frame_set_transform(GaussianAtom(X, Y))
            want = chirp_matrix(Y) @ dilation_matrix(spd_sqrt(X))
            assert np.max(np.abs(S - want)) <= 1e-12 * max(1.0, np.abs(want).max())
            assert is_symplectic(S, 1e-10)

    def test_sqrt(self):
        assert np.allclose(spd_sqrt(np.eye(3)), np.eye(3))
        assert np.allclose(spd_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))
        rng = np.random.default_rng(1)
        for _ in range(10):
            X = random_spd(rng, 3)
            R = spd_sqrt(X)
            assert np.max(np.abs(R @ R - X)) <= 1e-10 * np.abs(X).max()

    def test_sqrt_rejects(self):
        with pytest.raises(NotPositiveDefinite):
            spd_sqrt(np.diag([1.0, 0.0]))


class TestPreIwasawa:
    def test_identity(self):
        p = pre_iwasawa(np.eye(4))
        assert np.allclose(p.x_mat, np.eye(2)) and not np.abs(p.y_mat).max() > 0
        assert np.allclose(p.p_mat, np.eye(2)) and np.allclose(p.q_mat, 0)

    def test_j(self):
        p = pre_iwasawa(standard_j(2))
        assert np.allclose(p.x_mat, np.eye(2)) and np.allclose(p.y_mat, 0)
        assert np.allclose(p.p_mat, 0) and np.allclose(p.q_mat, np.eye(2))
        assert np.allclose(p.rotation, standard_j(2))

    @pytest.mark.parametrize("d", [1, 2])
    def test_random(self, d):
        for seed in range(20):
            S = random_symplectic(d, seed, 6)
            p = pre_iwasawa(S)
            scale = max(1.0, np.abs(S).max())
            assert np.max(np.abs(p.product() - S)) <= 1e-9 * scale
            O = p.rotation
            assert np.max(np.abs(O.T @ O - np.eye(2 * d))) <= 1e-9
            for F in p.factors():
                assert is_symplectic(F, 1e-9 * max(1.0, np.abs(F).max()) ** 2)

    def test_rejects(self):
        with pytest.raises(NotSymplectic):
            pre_iwasawa(2 * np.eye(2))

    def test_rotation_fixes_g0(self, grid1):
        # U_O g0 is g0 up to a phase for a symplectic rotation O (here the Fourier transform)
        g0 = standard_gaussian(1, grid1)
        out = apply_generator(Generator.fourier(), g0)
        assert np.max(np.abs(np.abs(out.values) - np.abs(g0.values))) <= 1e-12
        assert abs(out.inner(g0)) / (out.norm() * g0.norm()) == pytest.approx(1.0, abs=1e-12)


class TestFrameParams:
    @pytest.mark.parametrize("a,b", [(1.0, 1.0), (2.0, 0.5), (-0.7, 1.3)])
    def test_diagk_closed_form(self, a, b):
        res = gaussian_frame_params(DIAGK_LATTICE, [a, b])
        X, Y = diagk_closed_form(a, b)
        assert np.max(np.abs(res.x_mat - X)) <= 1e-12
        assert np.max(np.abs(res.y_mat - Y)) <= 1e-12
        assert np.allclose(res.k_diag, [1 / 2, 1 / 3], atol=1e-12)
        assert res.is_frame

    def test_separable_reduces_to_standard(self):
        K = np.diag([0.5, 0.25])
        A = np.block([[np.eye(2), np.zeros((2, 2))], [np.zeros((2, 2)), K]])
        res = gaussian_frame_params(A, [1.0, 1.0])
        assert np.allclose(res.x_mat, np.eye(2)) and np.allclose(res.y_mat, 0)

    def test_pair_c(self):
        res = gaussian_frame_params(load("pair_C"), [1.0, 1.0])
        assert np.allclose(res.k_diag, [2 / 5, 1 / 7], atol=1e-12)
        assert res.is_frame

    def test_not_diagonal(self):
        from conftest import PI_LATTICE
        with pytest.raises(NotDiagonalK):
            gaussian_frame_params(PI_LATTICE, [1.0, 1.0])

    def test_zero_d(self):
        with pytest.raises(ZeroDEntry):
            gaussian_frame_params(DIAGK_LATTICE, [1.0, 0.0])

    def test_outputs_spd(self):
        for seed in range(50):
            A, dv = random_valid_lattice(seed)
            res = gaussian_frame_params(A, dv)
            assert np.max(np.abs(res.x_mat - res.x_mat.T)) <= 1e-9
            assert np.max(np.abs(res.y_mat - res.y_mat.T)) <= 1e-9
            assert np.linalg.eigvalsh(res.x_mat).min() > 0

    def test_pipeline_consistency(self):
        for seed in range(20):
            A, dv = random_valid_lattice(seed)
            res = gaussian_frame_params(A, dv)
            S = pipeline_matrix(A, dv)
            assert is_symplectic(S, 1e-9 * max(1.0, np.abs(S).max()) ** 2)
            p = pre_iwasawa(S)
            assert np.max(np.abs(p.x_mat - res.x_mat)) <= 1e-9 * max(1.0, np.abs(res.x_mat).max())
            assert np.max(np.abs(p.y_mat - res.y_mat)) <= 1e-9 * max(1.0, np.abs(res.y_mat).max())
            d = len(dv)
            R = spd_sqrt(res.x_mat)
            A11, A12 = A[:d, :d], A[:d, d:]
            k = res.k_diag
            assert np.allclose(p.p_mat, R @ A11 @ np.diag(dv), atol=1e-9)
            assert np.allclose(p.q_mat, R @ A12 @ np.diag(1 / (dv * k)), atol=1e-9)


class TestCriterion:
    def test_values(self):
        assert lsw_criterion([1 / 2, 1 / 3])
        assert not lsw_criterion([1.0])
        assert lsw_criterion([math.pi / 5, -math.sqrt(2) / 3])

    def test_zero(self):
        with pytest.raises(ZeroEntry):
            lsw_criterion([0.5, 0.0])
