"""Uniform periodic grids, sampled functions and time-frequency shifts.

A grid of ``n`` points per axis covers [-T/2, T/2)^d with spacing h = T/n and
represents frequencies in [-1/(2h), 1/(2h)).  Inner products carry the cell
weight h^d, so they approximate L^2 inner products on R^d.

A sampled function may carry a symmetric ``carrier`` matrix Y0: the function
represented is then exp(-pi i t^T Y0 t) * values(t).  Strongly chirped atoms
(large Y0) alias on a plain grid, while their demodulated values do not, and
time-frequency shifts act on the demodulated values by an explicit formula.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import GridMismatch

__all__ = [
    "Grid",
    "SampledFunction",
    "TFShift",
    "default_grid",
    "apply_tf_shift",
    "tf_shift_stack",
    "trig_eval",
]

DEFAULTS = {1: (512, 16.0), 2: (48, 12.0)}


@dataclass(frozen=True)
class Grid:
    d: int
    n: int
    extent: float

    def __post_init__(self):
        if self.d not in (1, 2):
            raise ValueError("only d = 1 and d = 2 grids are supported")
        if self.n < 2 or self.n % 2:
            raise ValueError("grid size n must be even and at least 2")
        if not self.extent > 0:
            raise ValueError("extent must be positive")
        object.__setattr__(self, "extent", float(self.extent))

    @property
    def h(self) -> float:
        return self.extent / self.n

    @property
    def band(self) -> float:
        """Half-width 1/(2h) of the representable frequency band."""
        return 0.5 / self.h

    @property
    def shape(self):
        return (self.n,) * self.d

    @property
    def cell(self) -> float:
        return self.h ** self.d

    @property
    def axis(self) -> np.ndarray:
        return -0.5 * self.extent + self.h * np.arange(self.n)

    def mesh(self):
        """Coordinate arrays, one per axis, each of shape ``self.shape``."""
        return np.meshgrid(*([self.axis] * self.d), indexing="ij")

    def points(self) -> np.ndarray:
        """All grid points as an (n^d, d) array in C order."""
        return np.stack([m.ravel() for m in self.mesh()], axis=1)

    def refined(self, factor: int = 2) -> "Grid":
        """Same window, spacing divided by ``factor``."""
        return Grid(self.d, self.n * factor, self.extent)


def default_grid(d: int, n=None, extent=None) -> Grid:
    n0, t0 = DEFAULTS[d]
    return Grid(d, n0 if n is None else n, t0 if extent is None else extent)


def _as_sym(Y, d):
    if Y is None:
        return None
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if Y.shape != (d, d):
        raise ValueError("carrier must be d x d")
    if not np.any(Y):
        return None
    return 0.5 * (Y + Y.T)


@dataclass(frozen=True, eq=False)
class SampledFunction:
    grid: Grid
    values: np.ndarray
    carrier: np.ndarray | None = field(default=None)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.size != self.grid.n ** self.grid.d:
            raise ValueError("value count does not match the grid")
        v = v.reshape(self.grid.shape)
        if not np.all(np.isfinite(v)):
            raise ValueError("sampled values must be finite")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "carrier", _as_sym(self.carrier, self.grid.d))

    @property
    def d(self):
        return self.grid.d

    @property
    def n(self):
        return self.grid.n

    @property
    def extent(self):
        return self.grid.extent

    def with_values(self, values) -> "SampledFunction":
        return SampledFunction(self.grid, values, self.carrier)

    def chirp(self) -> np.ndarray:
        """exp(-pi i t^T Y0 t) on the grid (ones without a carrier)."""
        if self.carrier is None:
            return np.ones(self.grid.shape)
        return quadratic_phase(self.grid, self.carrier, -1.0)

    def materialize(self) -> "SampledFunction":
        """Equivalent sampled function without a carrier."""
        if self.carrier is None:
            return self
        return SampledFunction(self.grid, self.values * self.chirp())

    def norm(self) -> float:
        return float(np.sqrt(self.grid.cell * np.sum(np.abs(self.values) ** 2)))

    def inner(self, other: "SampledFunction") -> complex:
        """<self, other> = h^d sum self * conj(other)."""
        a, b = _compatible(self, other)
        return complex(self.grid.cell * np.vdot(b.values, a.values))

    def __add__(self, other):
        a, b = _compatible(self, other)
        return a.with_values(a.values + b.values)

    def __sub__(self, other):
        a, b = _compatible(self, other)
        return a.with_values(a.values - b.values)

    def scaled(self, c) -> "SampledFunction":
        return self.with_values(c * self.values)

    def conj(self) -> "SampledFunction":
        m = self.materialize()
        return SampledFunction(m.grid, np.conj(m.values))


def _compatible(a: SampledFunction, b: SampledFunction):
    if a.grid != b.grid:
        raise GridMismatch(f"grids differ: {a.grid} vs {b.grid}")
    if a.carrier is None and b.carrier is None:
        return a, b
    if a.carrier is not None and b.carrier is not None and np.array_equal(a.carrier, b.carrier):
        return a, b
    return a.materialize(), b.materialize()


def quadratic_phase(grid: Grid, Q, sign: float) -> np.ndarray:
    """exp(sign * pi i t^T Q t) on the grid."""
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    t = grid.mesh()
    form = sum(Q[i, j] * t[i] * t[j] for i in range(grid.d) for j in range(grid.d))
    return np.exp(sign * 1j * np.pi * form)


@dataclass(frozen=True, eq=False)
class TFShift:
    """z = (x, omega); pi(z) = M_omega T_x, rho(z) = exp(-pi i x.omega) pi(z)."""

    x: np.ndarray
    omega: np.ndarray
    symmetrized: bool = False

    def __post_init__(self):
        object.__setattr__(self, "x", np.atleast_1d(np.asarray(self.x, dtype=float)))
        object.__setattr__(self, "omega", np.atleast_1d(np.asarray(self.omega, dtype=float)))
        if self.x.shape != self.omega.shape:
            raise ValueError("x and omega must have the same length")

    @classmethod
    def from_point(cls, z, symmetrized=False):
        z = np.asarray(z, dtype=float)
        d = z.size // 2
        return cls(z[:d], z[d:], symmetrized)

    @property
    def point(self) -> np.ndarray:
        return np.concatenate([self.x, self.omega])


@lru_cache(maxsize=64)
def _signed_modes(n: int) -> np.ndarray:
    return np.fft.fftfreq(n) * n


def _ramp(n: int, extent: float, x: np.ndarray) -> np.ndarray:
    """Spectral multipliers of T_x for a batch of shifts x (shape (N,)) -> (N, n).

    The Nyquist mode is split symmetrically between +n/2 and -n/2, which keeps
    the interpolant of real data real and makes the multiplier a cosine.
    """
    k = _signed_modes(n)
    arg = -2j * np.pi * np.outer(x, k) / extent
    out = np.exp(arg)
    out[:, n // 2] = np.cos(np.pi * n * x / extent)
    return out


def tf_shift_stack(f: SampledFunction, pts: np.ndarray, symmetrized: bool = False) -> np.ndarray:
    """Values of pi(z) f for every row z of ``pts`` (shape (N, 2d)).

    Returns an array of shape (N, n^d) holding the values in the carrier frame
    of ``f`` (the carrier itself is unchanged by the shift).
    """
    grid = f.grid
    d, n = grid.d, grid.n
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    x = pts[:, :d]
    om = pts[:, d:].copy()
    phase = np.zeros(len(pts))
    if f.carrier is not None:
        om += x @ f.carrier.T
        phase -= 0.5 * np.einsum("ki,ij,kj->k", x, f.carrier, x)
    if symmetrized:
        phase -= 0.5 * np.einsum("ki,ki->k", x, pts[:, d:])
    axis = grid.axis
    if not x.any():
        # pure modulations: skip the spectral round trip, which is exact only up to rounding
        vals = np.repeat(f.values.reshape(1, -1), len(pts), axis=0).astype(complex)
        if d == 1:
            vals *= np.exp(2j * np.pi * np.outer(om[:, 0], axis))
        else:
            vals = vals.reshape(len(pts), n, n)
            vals *= np.exp(2j * np.pi * np.outer(om[:, 0], axis))[:, :, None]
            vals *= np.exp(2j * np.pi * np.outer(om[:, 1], axis))[:, None, :]
            vals = vals.reshape(len(pts), n * n)
        vals *= np.exp(2j * np.pi * phase)[:, None]
        return vals
    fhat = np.fft.fftn(f.values)
    if d == 1:
        spectrum = fhat[None, :] * _ramp(n, grid.extent, x[:, 0])
        vals = np.fft.ifft(spectrum, axis=1)
        vals *= np.exp(2j * np.pi * np.outer(om[:, 0], axis))
    else:
        r0 = _ramp(n, grid.extent, x[:, 0])
        r1 = _ramp(n, grid.extent, x[:, 1])
        spectrum = fhat[None, :, :] * r0[:, :, None] * r1[:, None, :]
        vals = np.fft.ifft2(spectrum, axes=(1, 2))
        vals *= np.exp(2j * np.pi * np.outer(om[:, 0], axis))[:, :, None]
        vals *= np.exp(2j * np.pi * np.outer(om[:, 1], axis))[:, None, :]
        vals = vals.reshape(len(pts), n * n)
    vals *= np.exp(2j * np.pi * phase)[:, None]
    return vals


def apply_tf_shift(z: TFShift, f: SampledFunction) -> SampledFunction:
    """pi(z) f, or rho(z) f when ``z.symmetrized``.

    Modulation is an exact pointwise product; translation multiplies the
    discrete spectrum by a phase ramp, which is exact (a circular shift) for
    grid-aligned x and band-limited interpolation otherwise.
    """
    if z.x.size != f.d:
        raise ValueError("shift dimension does not match the grid")
    vals = tf_shift_stack(f, z.point[None, :], z.symmetrized)[0]
    return f.with_values(vals)


def _mode_basis(n: int, extent: float, s: np.ndarray) -> np.ndarray:
    """Trigonometric basis e^{2 pi i k (s - t0)/T}/n at points s, shape (len(s), n)."""
    k = _signed_modes(n)
    u = (s + 0.5 * extent) / extent
    E = np.exp(2j * np.pi * np.outer(u, k)) / n
    E[:, n // 2] = np.cos(np.pi * n * u) / n
    return E


def trig_eval(f: SampledFunction, pts: np.ndarray) -> np.ndarray:
    """Evaluate the band-limited interpolant of ``f.values`` at arbitrary points.

    Points outside the window [-T/2, T/2)^d evaluate to zero: sampled
    functions model functions supported in the window, so no periodic copy
    is brought back.
    """
    grid = f.grid
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    n, T = grid.n, grid.extent
    c = np.fft.fftn(f.values)
    inside = np.all((pts >= -0.5 * T) & (pts < 0.5 * T), axis=1)
    out = np.zeros(len(pts), dtype=complex)
    idx = np.flatnonzero(inside)
    chunk = 4096
    for s in range(0, len(idx), chunk):
        sel = idx[s:s + chunk]
        if grid.d == 1:
            out[sel] = _mode_basis(n, T, pts[sel, 0]) @ c
        else:
            E0 = _mode_basis(n, T, pts[sel, 0])
            E1 = _mode_basis(n, T, pts[sel, 1])
            W = E1 @ c.T
            out[sel] = np.einsum("pk,pk->p", E0, W)
    return out
