"""Dense linear algebra for symplectic forms, lattice matrices and generators.

Matrices act on phase-space vectors z = (x, omega) in R^{2d}.  A lattice
matrix A generates the lattice A Z^{2d} through its columns.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NonInvertible, TooLarge

__all__ = [
    "TOL",
    "Generator",
    "as_phase_matrix",
    "half_dim",
    "standard_j",
    "chirp_matrix",
    "dilation_matrix",
    "word_matrix",
    "symplectic_form_of",
    "symplectic_residual",
    "is_symplectic",
    "pfaffian",
    "pfaffian_of_j",
    "covolume",
    "adjoint_matrix",
    "same_lattice",
    "symplectically_related",
    "adjoint_form_involution",
    "random_word",
    "random_symplectic",
]

TOL = 1e-9


def as_phase_matrix(A, name="matrix"):
    """Return ``A`` as a finite float array of shape (2d, 2d)."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] % 2 or A.shape[0] == 0:
        raise DimensionMismatch(f"{name} must be square of even size, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    return A


def half_dim(A) -> int:
    return np.shape(A)[0] // 2


def standard_j(d: int) -> np.ndarray:
    """The standard symplectic matrix ((0, I), (-I, 0)) of size 2d."""
    if d < 1:
        raise ValueError("d must be positive")
    eye = np.eye(d)
    zero = np.zeros((d, d))
    return np.block([[zero, eye], [-eye, zero]])


def chirp_matrix(P) -> np.ndarray:
    """V_P = ((I, 0), (-P, I)) for symmetric P."""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    d = P.shape[0]
    return np.block([[np.eye(d), np.zeros((d, d))], [-P, np.eye(d)]])


def dilation_matrix(L) -> np.ndarray:
    """M_L = ((L^{-1}, 0), (0, L^T)) for invertible L."""
    L = np.atleast_2d(np.asarray(L, dtype=float))
    d = L.shape[0]
    zero = np.zeros((d, d))
    return np.block([[np.linalg.inv(L), zero], [zero, L.T]])


@dataclass(frozen=True, eq=False)
class Generator:
    """One generator of the symplectic group.

    ``kind`` is ``"J"`` (Fourier), ``"V"`` (chirp V_P, ``mat`` = P) or ``"M"``
    (dilation M_L, ``mat`` = L).
    """

    kind: str
    mat: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("J", "V", "M"):
            raise ValueError(f"unknown generator kind {self.kind!r}")
        if self.kind != "J":
            m = np.atleast_2d(np.asarray(self.mat, dtype=float))
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise DimensionMismatch("generator parameter must be square")
            if self.kind == "V" and np.max(np.abs(m - m.T), initial=0.0) > TOL * max(1.0, np.abs(m).max()):
                raise ValueError("chirp parameter P must be symmetric")
            if self.kind == "M" and abs(np.linalg.det(m)) <= TOL:
                raise NonInvertible("dilation parameter L must be invertible")
            object.__setattr__(self, "mat", m)

    @classmethod
    def fourier(cls):
        return cls("J")

    @classmethod
    def chirp(cls, P):
        return cls("V", P)

    @classmethod
    def dilation(cls, L):
        return cls("M", L)

    @property
    def dim(self):
        return None if self.mat is None else self.mat.shape[0]

    def matrix(self, d: int | None = None) -> np.ndarray:
        if self.kind == "J":
            if d is None:
                raise ValueError("dimension needed for J")
            return standard_j(d)
        if self.kind == "V":
            return chirp_matrix(self.mat)
        return dilation_matrix(self.mat)

    def __repr__(self):
        if self.kind == "J":
            return "J"
        return f"{self.kind}({np.array2string(self.mat, precision=6, separator=', ')})"


def word_matrix(word, d: int) -> np.ndarray:
    """Matrix product of a generator word, factors multiplied left to right."""
    out = np.eye(2 * d)
    for g in word:
        out = out @ g.matrix(d)
    return out


def symplectic_form_of(A, tol: float = TOL) -> np.ndarray:
    """The symplectic form A^T J A of a lattice matrix."""
    A = as_phase_matrix(A, "A")
    if abs(np.linalg.det(A)) <= tol:
        raise NonInvertible("lattice matrix is singular")
    theta = A.T @ standard_j(half_dim(A)) @ A
    # remove rounding asymmetry so the result is exactly antisymmetric
    return 0.5 * (theta - theta.T)


def symplectic_residual(S) -> float:
    """max-norm of S^T J S - J."""
    S = as_phase_matrix(S, "S")
    J = standard_j(half_dim(S))
    return float(np.max(np.abs(S.T @ J @ S - J)))


def is_symplectic(S, tol: float = TOL) -> bool:
    return symplectic_residual(S) <= tol


def _pf(M: np.ndarray, idx: tuple) -> float:
    if not idx:
        return 1.0
    i = idx[0]
    total = 0.0
    for pos in range(1, len(idx)):
        j = idx[pos]
        if M[i, j] == 0.0:
            continue
        rest = idx[1:pos] + idx[pos + 1:]
        sign = 1.0 if pos % 2 == 1 else -1.0
        total += sign * M[i, j] * _pf(M, rest)
    return total


def pfaffian(theta) -> float:
    """Pfaffian of an antisymmetric 2d x 2d matrix by perfect-matching expansion.

    Only the strict upper triangle is read.  For d = 2 with upper entries
    (a, b, c, d, e, f) in row order this is af - be + cd.  Limited to d <= 4.
    """
    theta = as_phase_matrix(theta, "theta")
    if half_dim(theta) > 4:
        raise TooLarge("Pfaffian expansion limited to d <= 4")
    return _pf(theta, tuple(range(theta.shape[0])))


def pfaffian_of_j(d: int) -> float:
    """pf(J) = (-1)^{d(d-1)/2}; this is the sign linking pf(A^T J A) and det A."""
    return -1.0 if (d * (d - 1) // 2) % 2 else 1.0


def covolume(A) -> float:
    return float(abs(np.linalg.det(as_phase_matrix(A, "A"))))


def adjoint_matrix(A, tol: float = TOL) -> np.ndarray:
    """Generator matrix -J A^{-T} of the adjoint lattice."""
    A = as_phase_matrix(A, "A")
    if abs(np.linalg.det(A)) <= tol:
        raise NonInvertible("lattice matrix is singular")
    return -standard_j(half_dim(A)) @ np.linalg.inv(A).T


def same_lattice(A, B, tol: float = TOL) -> bool:
    """True iff A and B generate the same lattice (B = A M, M unimodular)."""
    A = as_phase_matrix(A, "A")
    B = as_phase_matrix(B, "B")
    if A.shape != B.shape:
        raise DimensionMismatch("lattice matrices differ in size")
    M = np.linalg.solve(A, B)
    if np.max(np.abs(M - np.rint(M))) > tol:
        return False
    return abs(abs(np.linalg.det(M)) - 1.0) <= tol


def symplectically_related(A, B, tol: float = TOL):
    """Return the symplectic S with B = S A if both forms agree, else None."""
    A = as_phase_matrix(A, "A")
    B = as_phase_matrix(B, "B")
    if A.shape != B.shape:
        raise DimensionMismatch("lattice matrices differ in size")
    diff = symplectic_form_of(A) - symplectic_form_of(B)
    if np.max(np.abs(diff)) > tol:
        return None
    return B @ np.linalg.inv(A)


def adjoint_form_involution(theta, tol: float = TOL) -> np.ndarray:
    """theta -> -theta^{-1}, the form of the adjoint lattice."""
    theta = as_phase_matrix(theta, "theta")
    if abs(np.linalg.det(theta)) <= tol:
        raise NonInvertible("form is singular")
    out = -np.linalg.inv(theta)
    return 0.5 * (out - out.T)


def random_word(d: int, seed: int, word_length: int, p_bound: float = 2.0,
                l_bound: float = 2.0, det_range=(0.2, 5.0)):
    """Random generator word used as a test fixture.

    Each letter is J, V(P) or M(L) with equal probability.  P is symmetric with
    entries uniform in [-p_bound, p_bound]; L has entries uniform in
    [-l_bound, l_bound] and is redrawn until ``|det L|`` lies in ``det_range``.
    """
    rng = np.random.default_rng(seed)
    lo, hi = det_range
    word = []
    for _ in range(word_length):
        kind = rng.integers(3)
        if kind == 0:
            word.append(Generator.fourier())
        elif kind == 1:
            P = rng.uniform(-p_bound, p_bound, (d, d))
            word.append(Generator.chirp(np.triu(P) + np.triu(P, 1).T))
        else:
            while True:
                L = rng.uniform(-l_bound, l_bound, (d, d))
                if lo <= abs(np.linalg.det(L)) <= hi:
                    break
            word.append(Generator.dilation(L))
    return word


def random_symplectic(d: int, seed: int, word_length: int, **kw) -> np.ndarray:
    """Product of ``word_length`` random generators; the empty product is I."""
    if word_length < 0:
        raise ValueError("word_length must be nonnegative")
    return word_matrix(random_word(d, seed, word_length, **kw), d)
