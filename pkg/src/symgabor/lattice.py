"""Lattice-level classification built on the symplectic form of a basis."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product

import numpy as np

from . import gaussian
from .errors import NotDiagonalK, TooLarge
from .symplectic import (
    TOL,
    as_phase_matrix,
    covolume,
    half_dim,
    pfaffian,
    symplectic_form_of,
)

__all__ = [
    "SeparableReduction",
    "LagrangianSplit",
    "ClassificationReport",
    "separable_form_check",
    "separable_reduction",
    "lagrangian_split",
    "classify",
    "bounded_orbit_search",
]

DENSITY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SeparableReduction:
    """A = S @ B with B = ((I, 0), (0, K)) and S symplectic."""

    K: np.ndarray
    B: np.ndarray
    S: np.ndarray


@dataclass(frozen=True)
class LagrangianSplit:
    """Complementary 0-based column index sets, each sigma-null."""

    left: tuple
    right: tuple


@dataclass(frozen=True, eq=False)
class ClassificationReport:
    theta: np.ndarray
    pfaffian: float
    covolume: float
    density_ok: bool
    separable_K: np.ndarray | None
    K_diagonal: bool
    gaussian_frame_verdict: bool | None
    lagrangian_split: LagrangianSplit | None
    gaussian: gaussian.GaussianFrameResult | None = None


def separable_form_check(theta, tol: float = TOL):
    """Upper-right block K of theta if both diagonal blocks vanish, else None."""
    theta = as_phase_matrix(theta, "theta")
    d = half_dim(theta)
    if np.max(np.abs(theta[:d, :d])) > tol or np.max(np.abs(theta[d:, d:])) > tol:
        return None
    K = theta[:d, d:].copy()
    if abs(np.linalg.det(K)) <= tol:
        return None
    return K


def separable_reduction(A, tol: float = TOL):
    """Factor A = S @ ((I, 0), (0, K)) when the form of A is separable."""
    A = as_phase_matrix(A, "A")
    d = half_dim(A)
    K = separable_form_check(symplectic_form_of(A, tol), tol)
    if K is None:
        return None
    Kinv = np.linalg.inv(K)
    B = np.block([[np.eye(d), np.zeros((d, d))], [np.zeros((d, d)), K]])
    S = np.block([[A[:d, :d], A[:d, d:] @ Kinv], [A[d:, :d], A[d:, d:] @ Kinv]])
    return SeparableReduction(K=K, B=B, S=S)


def _spans(cols: np.ndarray, k: int, tol: float) -> bool:
    s = np.linalg.svd(cols, compute_uv=False)
    return s.size >= k and s[k - 1] > tol * max(1.0, s[0])


def lagrangian_split(A, tol: float = TOL):
    """First (lexicographic) split of the columns into two sigma-null d-sets."""
    A = as_phase_matrix(A, "A")
    d = half_dim(A)
    if d > 4:
        raise TooLarge("Lagrangian split search limited to d <= 4")
    theta = symplectic_form_of(A, tol)
    n = 2 * d
    for left in combinations(range(n), d):
        if left[0] != 0:
            break  # every partition has already been seen with 0 on the left
        right = tuple(j for j in range(n) if j not in left)
        if np.max(np.abs(theta[np.ix_(left, left)])) > tol:
            continue
        if np.max(np.abs(theta[np.ix_(right, right)])) > tol:
            continue
        if not (_spans(A[:, left], d, tol) and _spans(A[:, right], d, tol)):
            continue
        if not _spans(A, n, tol):
            continue
        return LagrangianSplit(left=tuple(left), right=right)
    return None


def _is_diagonal(K, tol=TOL) -> bool:
    off = K - np.diag(np.diag(K))
    return float(np.max(np.abs(off), initial=0.0)) <= tol * float(np.max(np.abs(K)))


def classify(A, tol: float = TOL, d_diag=None) -> ClassificationReport:
    """Assemble the classification report of a lattice matrix.

    ``d_diag`` selects the diagonal matrix D used for the Gaussian parameters
    when K is diagonal (default: all ones).
    """
    A = as_phase_matrix(A, "A")
    d = half_dim(A)
    theta = symplectic_form_of(A, tol)
    pf = pfaffian(theta) if d <= 4 else float("nan")
    vol = covolume(A)
    K = separable_form_check(theta, tol)
    k_diag = K is not None and _is_diagonal(K)
    verdict = None
    gres = None
    if k_diag:
        dv = np.ones(d) if d_diag is None else np.asarray(d_diag, dtype=float)
        try:
            gres = gaussian.gaussian_frame_params(A, dv, tol)
            verdict = gres.is_frame
        except NotDiagonalK:
            verdict = None
    split = lagrangian_split(A, tol) if d <= 4 else None
    return ClassificationReport(
        theta=theta,
        pfaffian=pf,
        covolume=vol,
        density_ok=bool(vol <= 1.0 + DENSITY_TOL),
        separable_K=K,
        K_diagonal=bool(k_diag),
        gaussian_frame_verdict=verdict,
        lagrangian_split=split,
        gaussian=gres,
    )


def bounded_orbit_search(A, B, radius: int = 1, tol: float = TOL):
    """Search unimodular M with entries in [-radius, radius] and (AM)^T J (AM) = B^T J B.

    Columns of M are chosen one at a time by depth-first search; column j must
    pair with every earlier column i to the target entry theta_B[i, j].
    Candidate columns are ordered by l1 norm so that simple matrices (the
    identity in particular) are found first.  Returns None when the box holds
    no solution.
    """
    A = as_phase_matrix(A, "A")
    B = as_phase_matrix(B, "B")
    d = half_dim(A)
    if radius > 2 or d > 2 or radius < 1:
        raise TooLarge("bounded search supports d <= 2 and radius in {1, 2}")
    n = 2 * d
    tA = symplectic_form_of(A, tol)
    tB = symplectic_form_of(B, tol)
    scale = max(1.0, float(np.max(np.abs(tA))), float(np.max(np.abs(tB))))
    eps = tol * scale * (1 + 2 * radius) ** 2

    eye = np.eye(n)
    if np.max(np.abs(tA - tB)) <= eps:
        return eye
    # det(M) = +-1 forces det(theta_A) = det(theta_B)
    dA, dB = np.linalg.det(tA), np.linalg.det(tB)
    if abs(dA - dB) > tol * max(1.0, abs(dA), abs(dB)) * 1e3:
        return None

    cands = np.array([c for c in product(range(-radius, radius + 1), repeat=n) if any(c)], dtype=float)
    key = np.lexsort(tuple(-cands[:, j] for j in reversed(range(n))) + (np.abs(cands).sum(axis=1),))
    cands = cands[key]
    G = cands @ tA @ cands.T

    chosen: list[int] = []

    def dfs(j):
        if j == n:
            M = cands[chosen].T
            return M if abs(abs(round(np.linalg.det(M))) - 1) == 0 else None
        ok = np.ones(len(cands), dtype=bool)
        for i, ci in enumerate(chosen):
            ok &= np.abs(G[ci] - tB[i, j]) <= eps
        for c in np.flatnonzero(ok):
            chosen.append(int(c))
            cols = cands[chosen]
            if np.linalg.matrix_rank(cols) == len(chosen):
                M = dfs(j + 1)
                if M is not None:
                    return M
            chosen.pop()
        return None

    return dfs(0)
