"""Factorization of symplectic matrices and the unitary operators attached to them.

Every symplectic S is a product of at most two free matrices, and every free
matrix factors as V_{-DB^{-1}} M_{B^{-1}} J V_{-B^{-1}A}.  Mapping each
generator to its operator (chirp, dilation, Fourier transform) gives a unitary
U with U rho(z) U* = rho(Sz), up to an irrelevant global phase.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import IllConditioned, NotFree, NotSymplectic, OddDimension, SearchFailed, TooLarge
from .sampling import SampledFunction, TFShift, apply_tf_shift, quadratic_phase, trig_eval
from .symplectic import TOL, Generator, chirp_matrix, standard_j, symplectic_residual

__all__ = [
    "BlockSplit",
    "QuadraticFourierOp",
    "block_split",
    "is_free",
    "free_factorization",
    "two_free_factorization",
    "full_factorization",
    "quadratic_fourier",
    "apply_tf_shift",
    "apply_generator",
    "apply_word",
    "apply_quadratic_fourier",
    "rho_relatedness_residual",
    "conjugation_symmetry_residual",
]

P_SCAN = (0.0, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0, 3.0, -3.0)
FREE_TOL = 1e-6
COND_LIMIT = 1e6
QUAD_LIMIT = {1: 2048, 2: 64}


@dataclass(frozen=True, eq=False)
class BlockSplit:
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d_: np.ndarray

    def assemble(self) -> np.ndarray:
        return np.block([[self.a, self.b], [self.c, self.d_]])


def block_split(S) -> BlockSplit:
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1] or S.shape[0] % 2:
        raise OddDimension("block split needs a square matrix of even size")
    d = S.shape[0] // 2
    return BlockSplit(S[:d, :d].copy(), S[:d, d:].copy(), S[d:, :d].copy(), S[d:, d:].copy())


def _check_symplectic(S, tol):
    S = np.asarray(S, dtype=float)
    block_split(S)
    scale = max(1.0, float(np.abs(S).max())) ** 2
    if symplectic_residual(S) > tol * scale:
        raise NotSymplectic("matrix is not symplectic within tolerance")
    return S


def _free_threshold(S) -> float:
    return FREE_TOL * float(np.abs(S).max())


def is_free(S, tol: float = TOL) -> bool:
    """True iff the upper-right block of the symplectic S is invertible."""
    S = _check_symplectic(S, tol)
    return abs(np.linalg.det(block_split(S).b)) > tol


def _sym(M):
    return 0.5 * (M + M.T)


def free_factorization(S, tol: float = TOL):
    """[V(-DB^{-1}), M(B^{-1}), J, V(-B^{-1}A)] for free S."""
    S = _check_symplectic(S, tol)
    blk = block_split(S)
    if abs(np.linalg.det(blk.b)) <= tol:
        raise NotFree("upper-right block is singular")
    Binv = np.linalg.inv(blk.b)
    P1 = blk.d_ @ Binv
    P2 = Binv @ blk.a
    scale = max(1.0, float(np.abs(P1).max()), float(np.abs(P2).max()))
    if max(np.abs(P1 - P1.T).max(), np.abs(P2 - P2.T).max()) > 1e-9 * scale:
        raise NotSymplectic("DB^{-1} or B^{-1}A is not symmetric")
    return [Generator.chirp(-_sym(P1)), Generator.dilation(Binv), Generator.fourier(), Generator.chirp(-_sym(P2))]


def two_free_factorization(S, tol: float = TOL):
    """Split S = S1 @ S2 with both factors free.

    S2 = (V_{tI} J)^{-1} is always free; t runs over a fixed scan and the
    first value making S1 = S V_{tI} J free (|det b| > 1e-6 max|S|) is used.
    """
    S = _check_symplectic(S, tol)
    d = S.shape[0] // 2
    J = standard_j(d)
    thr = _free_threshold(S)
    for t in P_SCAN:
        VJ = chirp_matrix(t * np.eye(d)) @ J
        S1 = S @ VJ
        if abs(np.linalg.det(block_split(S1).b)) > thr:
            return S1, np.linalg.inv(VJ)
    raise SearchFailed("no scan value produced a free factor")


def full_factorization(S, tol: float = TOL):
    """Generator word for S: direct free path when possible, else two free factors."""
    S = _check_symplectic(S, tol)
    if abs(np.linalg.det(block_split(S).b)) > _free_threshold(S):
        return free_factorization(S, tol)
    S1, S2 = two_free_factorization(S, tol)
    return free_factorization(S1, tol) + free_factorization(S2, tol)


@dataclass(frozen=True, eq=False)
class QuadraticFourierOp:
    """U f(t) = norm * int f(x) exp(2 pi i W(t, x)) dx with
    W(t, x) = t^T db_inv t / 2 - x^T b_inv t + x^T b_inv_a x / 2."""

    db_inv: np.ndarray
    b_inv: np.ndarray
    b_inv_a: np.ndarray
    norm: float

    def phase(self, t, x):
        """W(t, x) for point arrays of shape (..., d)."""
        return (0.5 * np.einsum("...i,ij,...j->...", t, self.db_inv, t)
                - np.einsum("...i,ij,...j->...", x, self.b_inv, t)
                + 0.5 * np.einsum("...i,ij,...j->...", x, self.b_inv_a, x))


def quadratic_fourier(S, tol: float = TOL) -> QuadraticFourierOp:
    S = _check_symplectic(S, tol)
    blk = block_split(S)
    if abs(np.linalg.det(blk.b)) <= tol:
        raise NotFree("upper-right block is singular")
    Binv = np.linalg.inv(blk.b)
    return QuadraticFourierOp(
        db_inv=_sym(blk.d_ @ Binv),
        b_inv=Binv,
        b_inv_a=_sym(Binv @ blk.a),
        norm=float(np.sqrt(abs(np.linalg.det(Binv)))),
    )


@lru_cache(maxsize=16)
def _fourier_matrix(n: int, extent: float) -> np.ndarray:
    """Riemann-sum Fourier transform from the grid to itself along one axis.

    Rows for output frequencies beyond the band edge 1/(2h) are zero: the
    sampled function is band-limited there, while the Riemann sum would
    return a periodic copy.
    """
    h = extent / n
    t = -0.5 * extent + h * np.arange(n)
    F = h * np.exp(-2j * np.pi * np.outer(t, t))
    F[np.abs(t) >= 0.5 / h] = 0.0
    return F


def _fourier(f: SampledFunction) -> SampledFunction:
    f = f.materialize()
    F = _fourier_matrix(f.n, f.extent)
    v = f.values
    if f.d == 1:
        out = F @ v
    else:
        out = F @ v @ F.T
    return SampledFunction(f.grid, out)


def _dilate(L: np.ndarray, f: SampledFunction) -> SampledFunction:
    if np.linalg.cond(L) > COND_LIMIT:
        raise IllConditioned("dilation matrix condition number exceeds 1e6")
    f = f.materialize()
    grid = f.grid
    scale = np.sqrt(abs(np.linalg.det(L)))
    if np.array_equal(L, np.rint(L)):
        # grid-preserving: L t_j lands on grid index L (j - n/2) + n/2
        n = grid.n
        j = np.stack(np.meshgrid(*([np.arange(n)] * grid.d), indexing="ij"), axis=-1).reshape(-1, grid.d)
        idx = (j - n // 2) @ np.rint(L).astype(int).T + n // 2
        ok = np.all((idx >= 0) & (idx < n), axis=1)
        out = np.zeros(len(j), dtype=complex)
        out[ok] = f.values[tuple(idx[ok].T)]
        return SampledFunction(grid, scale * out.reshape(grid.shape))
    pts = grid.points() @ L.T
    return SampledFunction(grid, scale * trig_eval(f, pts).reshape(grid.shape))


def apply_generator(g: Generator, f: SampledFunction) -> SampledFunction:
    """Apply the operator of one generator.

    V(P): multiplication by exp(-pi i t^T P t).  M(L): f -> sqrt|det L| f(L t).
    J: the Fourier transform, evaluated by a Riemann sum on the grid.
    """
    if g.kind == "J":
        return _fourier(f)
    if g.dim != f.d:
        raise ValueError("generator dimension differs from the grid")
    if g.kind == "V":
        return f.with_values(f.values * quadratic_phase(f.grid, g.mat, -1.0))
    return _dilate(g.mat, f)


def apply_word(word, f: SampledFunction) -> SampledFunction:
    """Apply the operator of a word; the rightmost generator acts first."""
    for g in reversed(list(word)):
        f = apply_generator(g, f)
    return f


def apply_quadratic_fourier(op: QuadraticFourierOp, f: SampledFunction) -> SampledFunction:
    """Dense Riemann-sum quadrature of the quadratic Fourier transform.

    The sum over x is periodic in the frequency B^{-1} t with period 1/h, so
    output points whose frequency leaves the band [-1/(2h), 1/(2h)) are set
    to zero, as in the grid Fourier transform.
    """
    grid = f.grid
    if grid.n > QUAD_LIMIT[grid.d]:
        raise TooLarge(f"dense quadrature limited to n <= {QUAD_LIMIT[grid.d]} for d = {grid.d}")
    f = f.materialize()
    pts = grid.points()
    v = f.values.ravel()
    wx = 0.5 * np.einsum("ki,ij,kj->k", pts, op.b_inv_a, pts)
    wt = 0.5 * np.einsum("ki,ij,kj->k", pts, op.db_inv, pts)
    fx = v * np.exp(2j * np.pi * wx)
    out = np.empty(len(pts), dtype=complex)
    chunk = 512
    for s in range(0, len(pts), chunk):
        t = pts[s:s + chunk]
        cross = t @ op.b_inv.T @ pts.T
        out[s:s + chunk] = np.exp(-2j * np.pi * cross) @ fx
    freq = pts @ op.b_inv.T
    out[np.any(np.abs(freq) >= grid.band, axis=1)] = 0.0
    out *= op.norm * grid.cell * np.exp(2j * np.pi * wt)
    return SampledFunction(grid, out.reshape(grid.shape))


def _as_points(zs, d):
    out = []
    for z in zs:
        if isinstance(z, TFShift):
            out.append(z.point)
        else:
            out.append(np.asarray(z, dtype=float).ravel())
    pts = np.array(out, dtype=float).reshape(-1, 2 * d)
    return pts


def rho_relatedness_residual(S, f: SampledFunction, zs, word=None) -> float:
    """max over z of ||U rho(z) f - rho(Sz) U f|| / ||f||.

    U is the operator of ``full_factorization(S)`` unless an explicit
    ``word`` is given.
    """
    S = _check_symplectic(S, TOL)
    if word is None:
        word = full_factorization(S)
    nf = f.norm()
    if nf == 0:
        return 0.0
    Uf = apply_word(word, f)
    worst = 0.0
    for z in _as_points(zs, f.d):
        lhs = apply_word(word, apply_tf_shift(TFShift.from_point(z, True), f))
        rhs = apply_tf_shift(TFShift.from_point(S @ z, True), Uf)
        worst = max(worst, (lhs - rhs).norm() / nf)
    return worst


def conjugation_symmetry_residual(z: TFShift, f: SampledFunction) -> float:
    """||pi(Rz) conj(f) - conj(pi(z) f)|| / ||f|| with R = diag(I, -I)."""
    nf = f.norm()
    if nf == 0:
        return 0.0
    plain = TFShift(z.x, z.omega, False)
    reflected = TFShift(z.x, -z.omega, False)
    lhs = apply_tf_shift(reflected, f.conj())
    rhs = apply_tf_shift(plain, f).conj()
    return (lhs - rhs).norm() / nf
