"""Generalized Gaussians, the pre-Iwasawa factorization and the Gaussian frame criterion.

A generalized Gaussian is g_{X,Y}(t) = C exp(-pi t^T (X + iY) t) with X
positive definite and Y symmetric.  Its frame set is the image of the frame
set of the standard Gaussian under the frame-set transform V_Y M_{X^{1/2}}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    IllConditioned,
    NotDiagonalK,
    NotPositiveDefinite,
    NotSymplectic,
    ZeroDEntry,
    ZeroEntry,
)
from .sampling import Grid, SampledFunction
from .symplectic import TOL, as_phase_matrix, chirp_matrix, dilation_matrix, half_dim, standard_j, symplectic_residual

__all__ = [
    "GaussianAtom",
    "PreIwasawa",
    "GaussianFrameResult",
    "standard_gaussian",
    "gaussian_atom_samples",
    "frame_set_transform",
    "spd_sqrt",
    "pre_iwasawa",
    "pipeline_matrix",
    "gaussian_frame_params",
    "lsw_criterion",
]

EIG_FLOOR = 1e-12
COND_MAX = 1e12


def _sym(M, name, tol=1e-10):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be square")
    if np.max(np.abs(M - M.T), initial=0.0) > tol * max(1.0, float(np.abs(M).max())):
        raise ValueError(f"{name} must be symmetric")
    return 0.5 * (M + M.T)


def spd_sqrt(X) -> np.ndarray:
    """Positive definite square root through the symmetric eigendecomposition."""
    try:
        X = _sym(X, "X", 1e-9)
    except ValueError as exc:
        raise NotPositiveDefinite(str(exc)) from None
    w, V = np.linalg.eigh(X)
    if w.min() <= EIG_FLOOR:
        raise NotPositiveDefinite(f"smallest eigenvalue {w.min():.3e} is not positive")
    R = (V * np.sqrt(w)) @ V.T
    return 0.5 * (R + R.T)


def _inv_sqrt(X) -> np.ndarray:
    w, V = np.linalg.eigh(0.5 * (X + X.T))
    R = (V / np.sqrt(w)) @ V.T
    return 0.5 * (R + R.T)


@dataclass(frozen=True, eq=False)
class GaussianAtom:
    """g_{X,Y}; ``amplitude`` defaults to the L2-normalizing 2^{d/4} det(X)^{1/4}."""

    x_mat: np.ndarray
    y_mat: np.ndarray
    amplitude: complex | None = None

    def __post_init__(self):
        try:
            X = _sym(self.x_mat, "X")
        except ValueError as exc:
            raise NotPositiveDefinite(str(exc)) from None
        Y = _sym(self.y_mat, "Y")
        if X.shape != Y.shape:
            raise ValueError("X and Y must have the same size")
        if np.linalg.eigvalsh(X).min() <= EIG_FLOOR:
            raise NotPositiveDefinite("X is not positive definite")
        object.__setattr__(self, "x_mat", X)
        object.__setattr__(self, "y_mat", Y)
        if self.amplitude is None:
            d = X.shape[0]
            c = 2.0 ** (d / 4) * np.linalg.det(X) ** 0.25
            object.__setattr__(self, "amplitude", complex(c))

    @classmethod
    def standard(cls, d: int):
        return cls(np.eye(d), np.zeros((d, d)))

    @property
    def d(self) -> int:
        return self.x_mat.shape[0]

    def __call__(self, t) -> np.ndarray:
        """Evaluate at points ``t`` of shape (..., d)."""
        t = np.asarray(t, dtype=float)
        Z = self.x_mat + 1j * self.y_mat
        return self.amplitude * np.exp(-np.pi * np.einsum("...i,ij,...j->...", t, Z, t))


def standard_gaussian(d: int, grid: Grid) -> SampledFunction:
    """Samples of g0(t) = 2^{d/4} exp(-pi |t|^2)."""
    if grid.d != d:
        raise ValueError("grid dimension differs from d")
    r2 = sum(m ** 2 for m in grid.mesh())
    return SampledFunction(grid, 2.0 ** (d / 4) * np.exp(-np.pi * r2))


def gaussian_atom_samples(g: GaussianAtom, grid: Grid, carrier: bool = False) -> SampledFunction:
    """Samples of g_{X,Y} on ``grid``.

    With ``carrier=True`` the chirp exp(-pi i t^T Y t) is kept symbolic as the
    carrier of the result and only the real envelope is sampled.
    """
    if grid.d != g.d:
        raise ValueError("grid dimension differs from the atom")
    pts = np.stack(grid.mesh(), axis=-1)
    if carrier:
        env = GaussianAtom(g.x_mat, np.zeros_like(g.y_mat), g.amplitude)
        return SampledFunction(grid, env(pts), g.y_mat)
    return SampledFunction(grid, g(pts))


def frame_set_transform(g: GaussianAtom) -> np.ndarray:
    """S = ((X^{-1/2}, 0), (-Y X^{-1/2}, X^{1/2})), mapping frame sets of g0 to those of g."""
    R = spd_sqrt(g.x_mat)
    Ri = _inv_sqrt(g.x_mat)
    d = g.d
    return np.block([[Ri, np.zeros((d, d))], [-g.y_mat @ Ri, R]])


@dataclass(frozen=True, eq=False)
class PreIwasawa:
    """S = V_Y M_{X^{1/2}} O with O = ((P, Q), (-Q, P))."""

    y_mat: np.ndarray
    x_mat: np.ndarray
    p_mat: np.ndarray
    q_mat: np.ndarray

    @property
    def rotation(self) -> np.ndarray:
        P, Q = self.p_mat, self.q_mat
        return np.block([[P, Q], [-Q, P]])

    def factors(self):
        """The three symplectic factors (V_Y, M_{X^{1/2}}, O)."""
        return chirp_matrix(self.y_mat), dilation_matrix(spd_sqrt(self.x_mat)), self.rotation

    def product(self) -> np.ndarray:
        a, b, c = self.factors()
        return a @ b @ c


def pre_iwasawa(S, tol: float = TOL) -> PreIwasawa:
    S = as_phase_matrix(S, "S")
    if symplectic_residual(S) > tol * max(1.0, float(np.abs(S).max()) ** 2):
        raise NotSymplectic("pre-Iwasawa factorization needs a symplectic matrix")
    d = half_dim(S)
    A, B, C, D = S[:d, :d], S[:d, d:], S[d:, :d], S[d:, d:]
    G = A @ A.T + B @ B.T
    X = np.linalg.inv(0.5 * (G + G.T))
    X = 0.5 * (X + X.T)
    Y = -(C @ A.T + D @ B.T) @ X
    Y = 0.5 * (Y + Y.T)
    R = spd_sqrt(X)
    return PreIwasawa(y_mat=Y, x_mat=X, p_mat=R @ A, q_mat=R @ B)


def _k_from_form(A, tol):
    A = as_phase_matrix(A, "A")
    d = half_dim(A)
    theta = A.T @ standard_j(d) @ A
    theta = 0.5 * (theta - theta.T)
    if np.max(np.abs(theta[:d, :d])) > tol or np.max(np.abs(theta[d:, d:])) > tol:
        raise NotDiagonalK("form has nonzero diagonal blocks")
    K = theta[:d, d:]
    off = K - np.diag(np.diag(K))
    if np.max(np.abs(off), initial=0.0) > 1e-9 * float(np.abs(K).max()):
        raise NotDiagonalK("off-diagonal entries of K do not vanish")
    k = np.diag(K).copy()
    if np.any(k == 0):
        raise NotDiagonalK("K is singular")
    return A, d, k


def pipeline_matrix(A, d_diag, tol: float = TOL) -> np.ndarray:
    """S = A ((I, 0), (0, K))^{-1} M_{D^{-1}}, the symplectic matrix behind the criterion."""
    A, d, k = _k_from_form(A, tol)
    dv = np.asarray(d_diag, dtype=float)
    if dv.shape != (d,) or np.any(dv == 0):
        raise ZeroDEntry("D entries must be nonzero")
    right = np.concatenate([dv, 1.0 / (dv * k)])
    return A * right[None, :]


@dataclass(frozen=True, eq=False)
class GaussianFrameResult:
    x_mat: np.ndarray
    y_mat: np.ndarray
    k_diag: np.ndarray
    is_frame: bool

    def atom(self) -> GaussianAtom:
        return GaussianAtom(self.x_mat, self.y_mat)


def gaussian_frame_params(A, d_diag, tol: float = TOL) -> GaussianFrameResult:
    """Gaussian parameters (X, Y) adapted to a lattice with diagonal K.

    Parameters
    ----------
    A : (2d, 2d) array
        Lattice matrix whose form is ((0, K), (-K, 0)) with K diagonal.
    d_diag : (d,) array
        Diagonal of the free scaling matrix D; entries must be nonzero.

    Returns
    -------
    GaussianFrameResult
        X = (A11 D^2 A11^T + A12 (DK)^{-2} A12^T)^{-1},
        Y = -(A21 D^2 A11^T + A22 (DK)^{-2} A12^T) X, the diagonal of K and
        the verdict max |K_jj| < 1.
    """
    A, d, k = _k_from_form(A, tol)
    dv = np.asarray(d_diag, dtype=float).ravel()
    if dv.shape != (d,):
        raise ValueError("d_diag must have d entries")
    if np.any(dv == 0):
        raise ZeroDEntry("D entries must be nonzero")
    A11, A12, A21, A22 = A[:d, :d], A[:d, d:], A[d:, :d], A[d:, d:]
    D2 = dv ** 2
    W = 1.0 / (dv * k) ** 2
    G = (A11 * D2) @ A11.T + (A12 * W) @ A12.T
    G = 0.5 * (G + G.T)
    if np.linalg.cond(G) > COND_MAX:
        raise IllConditioned("matrix inverted to form X is ill-conditioned")
    X = np.linalg.inv(G)
    X = 0.5 * (X + X.T)
    Y = -((A21 * D2) @ A11.T + (A22 * W) @ A12.T) @ X
    Y = 0.5 * (Y + Y.T)
    return GaussianFrameResult(x_mat=X, y_mat=Y, k_diag=k, is_frame=lsw_criterion(k))


def lsw_criterion(k_diag) -> bool:
    """True iff every |k_j| < 1 (strict)."""
    k = np.atleast_1d(np.asarray(k_diag, dtype=float))
    if np.any(k == 0):
        raise ZeroEntry("criterion entries must be nonzero")
    return bool(np.all(np.abs(k) < 1.0))
