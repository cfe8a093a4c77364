"""Truncated Gabor-system numerics on sampled functions.

Sums over a lattice A Z^{2d} run over k with |k|_inf <= R in lexicographic
order.  Lattice points whose shifted atom cannot be represented on the grid
(translation beyond the window, or frequency beyond the band once the carrier
is accounted for) are dropped: on the periodic grid such a shift would wrap
around or alias onto a different shift instead of leaving the window.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import GridMismatch, NotAFrame, NotConverged, NotRelated
from .gaussian import GaussianAtom, spd_sqrt
from .metaplectic import apply_word, full_factorization
from .sampling import SampledFunction, tf_shift_stack
from .symplectic import adjoint_matrix, as_phase_matrix, half_dim, symplectic_form_of

__all__ = [
    "TruncationSpec",
    "FrameBounds",
    "default_truncation",
    "lattice_indices",
    "representable",
    "analysis_coefficients",
    "bessel_sum",
    "frame_operator_apply",
    "probe_basis",
    "compressed_frame_matrix",
    "frame_bounds_estimate",
    "janssen_residual",
    "wexler_raz_residual",
    "canonical_dual",
    "operator_norm_estimate",
    "equivalence_residual",
]

CHUNK = 1024


@dataclass(frozen=True)
class TruncationSpec:
    radius: int

    def __post_init__(self):
        if int(self.radius) != self.radius or self.radius < 1:
            raise ValueError("truncation radius must be a positive integer")


@dataclass(frozen=True)
class FrameBounds:
    lower: float
    upper: float
    iterations: int
    converged: bool

    @property
    def ratio(self) -> float:
        return self.lower / self.upper if self.upper > 0 else 0.0


def default_truncation(d: int) -> TruncationSpec:
    return TruncationSpec(8 if d == 1 else 4)


def _trunc(trunc, d):
    if trunc is None:
        return default_truncation(d)
    if isinstance(trunc, int):
        return TruncationSpec(trunc)
    return trunc


def lattice_indices(d: int, radius: int) -> np.ndarray:
    """All k in Z^{2d} with |k|_inf <= radius, lexicographic, shape (N, 2d)."""
    r = range(-radius, radius + 1)
    return np.array(list(product(r, repeat=2 * d)), dtype=float)


def representable(f: SampledFunction, pts: np.ndarray, frac: float = 1.0) -> np.ndarray:
    """Mask of phase-space points z whose shift of a centred atom stays on the grid.

    A shift by (x, omega) moves values by x and their frequencies by
    omega + Y0 x (Y0 the carrier).  Both must stay strictly within ``frac``
    of the half-window T/2 and the half-band 1/(2h); the edge values are
    excluded because x = +-T/2 (and omega = +-1/(2h)) name the same shift on
    the periodic grid.
    """
    grid = f.grid
    d = grid.d
    x = pts[:, :d]
    om = pts[:, d:]
    if f.carrier is not None:
        om = om + x @ f.carrier.T
    eps = 1e-9
    ok = np.all(np.abs(x) < frac * 0.5 * grid.extent * (1 - eps), axis=1)
    ok &= np.all(np.abs(om) < frac * grid.band * (1 - eps), axis=1)
    return ok


def _check(*fs):
    a = fs[0]
    for b in fs[1:]:
        if b.grid != a.grid:
            raise GridMismatch("sampled functions live on different grids")
    carriers = [f.carrier for f in fs]
    if all(c is None for c in carriers):
        return fs
    if all(c is not None and np.array_equal(c, carriers[0]) for c in carriers):
        return fs
    return tuple(f.materialize() for f in fs)


def _lattice(A, f, trunc, frac=1.0):
    A = as_phase_matrix(A, "A")
    d = half_dim(A)
    if d != f.d:
        raise GridMismatch("lattice dimension differs from the grid")
    ks = lattice_indices(d, _trunc(trunc, d).radius)
    pts = ks @ A.T
    keep = representable(f, pts, frac)
    return ks, pts, keep


def _coefficients(g, pts, f, symmetrized):
    out = np.empty(len(pts), dtype=complex)
    fv = f.values.ravel()
    for s in range(0, len(pts), CHUNK):
        stack = tf_shift_stack(g, pts[s:s + CHUNK], symmetrized)
        out[s:s + CHUNK] = f.grid.cell * (stack.conj() @ fv)
    return out


def analysis_coefficients(g: SampledFunction, A, f: SampledFunction, trunc=None, symmetrized: bool = False):
    """<f, pi(Ak) g> for |k|_inf <= R as an array of shape (2R+1,)*2d.

    Entry ``[k + R]`` holds the coefficient of index k; lattice points dropped
    as non-representable hold zero.
    """
    g, f = _check(g, f)
    ks, pts, keep = _lattice(A, g, trunc)
    R = int(np.abs(ks).max())
    vals = np.zeros(len(ks), dtype=complex)
    vals[keep] = _coefficients(g, pts[keep], f, symmetrized)
    return vals.reshape((2 * R + 1,) * (2 * g.d))


def bessel_sum(g: SampledFunction, A, f: SampledFunction, trunc=None, symmetrized: bool = False) -> float:
    """sum over |k|_inf <= R of |<f, pi(Ak) g>|^2."""
    c = analysis_coefficients(g, A, f, trunc, symmetrized)
    return float(np.sum(np.abs(c) ** 2))


def frame_operator_apply(g: SampledFunction, h: SampledFunction, A, f: SampledFunction, trunc=None,
                         frac: float = 1.0) -> SampledFunction:
    """S_{g,h} f = sum <f, pi(Ak) g> pi(Ak) h, accumulated in lexicographic k order."""
    g, h, f = _check(g, h, f)
    _, pts, keep = _lattice(A, g, trunc, frac)
    pts = pts[keep]
    fv = f.values.ravel()
    acc = np.zeros_like(fv)
    for s in range(0, len(pts), CHUNK):
        chunk = pts[s:s + CHUNK]
        c = g.grid.cell * (tf_shift_stack(g, chunk).conj() @ fv)
        acc += c @ tf_shift_stack(h, chunk)
    return f.with_values(acc.reshape(f.grid.shape))


def _hermite_1d(order: int, s: np.ndarray) -> np.ndarray:
    """L2-normalized Hermite functions for the weight exp(-pi s^2), degrees 0..order."""
    u = np.sqrt(2 * np.pi) * s
    out = np.empty((order + 1,) + s.shape)
    out[0] = 2 ** 0.25 * np.exp(-np.pi * s ** 2)
    if order >= 1:
        out[1] = np.sqrt(2.0) * u * out[0]
    for k in range(1, order):
        out[k + 1] = np.sqrt(2.0 / (k + 1)) * u * out[k] - np.sqrt(k / (k + 1)) * out[k - 1]
    return out


def probe_basis(like: SampledFunction, order: int, shape: GaussianAtom | None = None):
    """Orthonormal probe functions localized around the atom ``shape``.

    The probes are the images U h_alpha of the tensor Hermite functions with
    max degree <= ``order`` under the Gaussian's frame-set transform
    (g0 -> g_{X,Y}); they fill a phase-space region of area about
    (order+1)^d centred at the origin.  Returned as an (m, n^d) array of
    values in the carrier frame of ``like``, orthonormal for the
    cell-weighted inner product.
    """
    grid = like.grid
    d = grid.d
    if shape is None:
        shape = GaussianAtom.standard(d)
    R = spd_sqrt(shape.x_mat)
    t = np.stack(grid.mesh(), axis=-1)
    s = t @ R.T
    hs = [_hermite_1d(order, s[..., i]) for i in range(d)]
    scale = np.linalg.det(shape.x_mat) ** 0.25
    Y = shape.y_mat
    if like.carrier is not None:
        Y = Y - like.carrier
    chirp = np.exp(-1j * np.pi * np.einsum("...i,ij,...j->...", t, Y, t))
    rows = []
    for alpha in product(range(order + 1), repeat=d):
        v = scale * np.prod([hs[i][alpha[i]] for i in range(d)], axis=0) * chirp
        rows.append(v.ravel())
    V = np.array(rows)
    # orthonormalize against the discrete inner product
    Q, _ = np.linalg.qr(V.T * np.sqrt(grid.cell))
    return Q.T / np.sqrt(grid.cell)


def compressed_frame_matrix(g: SampledFunction, A, basis: np.ndarray, trunc=None) -> np.ndarray:
    """G[i, j] = <S v_j, v_i> for the truncated frame operator S of (g, A)."""
    ks, pts, keep = _lattice(A, g, trunc)
    pts = pts[keep]
    C = np.empty((basis.shape[0], len(pts)), dtype=complex)
    for s in range(0, len(pts), CHUNK):
        stack = tf_shift_stack(g, pts[s:s + CHUNK])
        C[:, s:s + CHUNK] = g.grid.cell * (basis @ stack.conj().T)
    G = np.conj(C) @ C.T
    return 0.5 * (G + G.conj().T)


def _power(G, starts, max_iter, rtol):
    best, iters, conv = -np.inf, 0, True
    for v in starts:
        v = v / np.linalg.norm(v)
        lam = np.real(np.vdot(v, G @ v))
        for it in range(1, max_iter + 1):
            w = G @ v
            nw = np.linalg.norm(w)
            if nw == 0:
                lam_new = 0.0
                break
            v = w / nw
            lam_new = np.real(np.vdot(v, G @ v))
            if abs(lam_new - lam) <= rtol * max(abs(lam_new), 1e-300):
                break
            lam = lam_new
        else:
            conv = False
        iters += it
        best = max(best, lam_new)
    return best, iters, conv


def frame_bounds_estimate(g: SampledFunction, A, grid=None, trunc=None, probes: int = 4, seed: int = 0,
                          order: int | None = None, shape: GaussianAtom | None = None,
                          max_iter: int = 20000, rtol: float = 1e-13) -> FrameBounds:
    """Extremal Rayleigh quotients of the truncated frame operator on a probe space.

    The probe space is ``probe_basis(g, order, shape)``: functions localized
    in the central part of phase space, away from the window edge and from
    the boundary of the truncated lattice, where the discretized operator
    degenerates for reasons unrelated to the frame property.  The upper bound
    comes from power iteration, the lower bound from power iteration on
    upper*I - S.  Each iteration uses ``probes`` seeded random starts and
    keeps the best value.
    """
    if grid is not None and grid != g.grid:
        raise GridMismatch("grid differs from the atom's grid")
    if order is None:
        order = 16 if g.d == 1 else 3
    basis = probe_basis(g, order, shape)
    G = compressed_frame_matrix(g, A, basis, trunc)
    m = G.shape[0]
    rng = np.random.default_rng(seed)
    starts = rng.standard_normal((probes, m)) + 1j * rng.standard_normal((probes, m))
    upper, it1, c1 = _power(G, starts, max_iter, rtol)
    shifted = upper * np.eye(m) - G
    top, it2, c2 = _power(shifted, starts, max_iter, rtol)
    lower = max(upper - top, 0.0)
    return FrameBounds(lower=float(min(lower, upper)), upper=float(upper), iterations=it1 + it2,
                       converged=bool(c1 and c2))


def janssen_residual(g: SampledFunction, h: SampledFunction, f: SampledFunction, A, trunc=None) -> float:
    """||S^A_{g,h} f - |A|^{-1} S^{A-adjoint}_{g,f} h|| / ||f||."""
    g, h, f = _check(g, h, f)
    nf = f.norm()
    if nf == 0:
        return 0.0
    A = as_phase_matrix(A, "A")
    lhs = frame_operator_apply(g, h, A, f, trunc)
    rhs = frame_operator_apply(g, f, adjoint_matrix(A), h, trunc)
    vol = abs(np.linalg.det(A))
    return (lhs - rhs.scaled(1.0 / vol)).norm() / nf


def wexler_raz_residual(g: SampledFunction, h: SampledFunction, A, trunc=None, frac: float = 0.5) -> float:
    """max over k, l of |<pi(A°k) h, pi(A°l) g> - |A| delta_kl|.

    Indices are restricted to adjoint-lattice points within ``frac`` of the
    window and band, so both shifted atoms stay clear of the window edge.
    A zero g or h gives 0: the relations carry no information there, and
    all residuals here vanish on zero input.
    """
    g, h = _check(g, h)
    if not np.any(g.values) or not np.any(h.values):
        return 0.0
    A = as_phase_matrix(A, "A")
    _, pts, keep = _lattice(adjoint_matrix(A), g, trunc, frac)
    pts = pts[keep]
    Hs = tf_shift_stack(h, pts)
    Gs = tf_shift_stack(g, pts)
    gram = g.grid.cell * (Gs.conj() @ Hs.T)
    gram -= abs(np.linalg.det(A)) * np.eye(len(pts))
    return float(np.abs(gram).max()) if len(pts) else 0.0


def operator_norm_estimate(g: SampledFunction, A, trunc=None, iters: int = 60, seed: int = 0) -> float:
    """Largest eigenvalue of S_{g,g} on the whole grid by power iteration.

    The probe-space bounds see only a subspace; a step size for an iteration
    on the full grid has to respect the top of the full spectrum.
    """
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(g.grid.shape) + 1j * rng.standard_normal(g.grid.shape)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(iters):
        w = frame_operator_apply(g, g, A, g.with_values(v), trunc).values
        lam = float(np.vdot(v, w).real)
        nw = np.linalg.norm(w)
        if nw == 0:
            return 0.0
        v = w / nw
    return lam


def canonical_dual(g: SampledFunction, A, grid=None, trunc=None, max_iter: int = 500, tol: float = 1e-4,
                   bounds: FrameBounds | None = None) -> SampledFunction:
    """Solve S_{g,g} h = g by the frame (Richardson) iteration.

    h <- h + w (g - S h) with w = 2 / (lower + upper_full), where lower comes
    from the bound estimate and upper_full from power iteration on the full
    grid (inflated by 5%).  Each step contracts the residual on the span of
    the truncated lattice.  The truncated system also has modes near the
    window edge that the lattice barely reaches; there the residual cannot be
    reduced, so the iteration stops with NotConverged once progress stalls.
    Raises NotAFrame when the bound estimate shows no positive lower bound.
    """
    if grid is not None and grid != g.grid:
        raise GridMismatch("grid differs from the atom's grid")
    if bounds is None:
        bounds = frame_bounds_estimate(g, A, trunc=trunc)
    if bounds.upper <= 0 or bounds.lower <= 1e-8 * bounds.upper:
        raise NotAFrame("lower frame bound estimate vanishes")
    top = 1.05 * max(bounds.upper, operator_norm_estimate(g, A, trunc))
    step = 2.0 / (bounds.lower + top)

    b = g.values
    nb = np.linalg.norm(b)
    h = step * b
    best = np.inf
    stall = 0
    rel = np.inf
    for _ in range(max_iter):
        r = b - frame_operator_apply(g, g, A, g.with_values(h), trunc).values
        rel = np.linalg.norm(r) / nb
        if rel <= tol:
            return g.with_values(h)
        if rel < 0.99 * best:
            best, stall = rel, 0
        else:
            stall += 1
            if stall >= 25:
                break
        h = h + step * r
    raise NotConverged(f"relative residual {rel:.2e} did not reach {tol:.1e}")


def equivalence_residual(A, B, g: SampledFunction, f: SampledFunction, trunc=None, tol: float = 1e-9) -> float:
    """Relative gap between sum |<Uf, rho(Bk) Ug>|^2 and sum |<f, rho(Ak) g>|^2.

    U is the operator of ``full_factorization(B A^{-1})``; the two sums agree
    exactly in the continuum whenever A and B have the same symplectic form.
    """
    A = as_phase_matrix(A, "A")
    B = as_phase_matrix(B, "B")
    if np.max(np.abs(symplectic_form_of(A) - symplectic_form_of(B))) > tol:
        raise NotRelated("lattice matrices determine different symplectic forms")
    g, f = _check(g, f)
    word = full_factorization(B @ np.linalg.inv(A))
    Ug = apply_word(word, g)
    Uf = apply_word(word, f)
    ref = bessel_sum(g, A, f, trunc, symmetrized=True)
    if ref == 0:
        return 0.0
    return abs(bessel_sum(Ug, B, Uf, trunc, symmetrized=True) - ref) / ref
