"""Uniform 1D grids and finite-difference Hamiltonians.

Samples where the potential is infinite are Dirichlet nodes: they are
dropped from the operator and the wavefunction is pinned to zero there.
A :class:`TridiagonalOperator` therefore acts on a *support* (the free
samples of its grid) and knows how to embed its vectors back onto the
full grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np

__all__ = [
    "Grid",
    "BarrierInterval",
    "TridiagonalOperator",
    "Split",
    "build_grid",
    "assemble_hamiltonian",
    "split_domain",
    "parity_sector",
]


@dataclass(frozen=True)
class Grid:
    """Evenly spaced samples on ``[xmin, xmax]``.

    With ``walls=True`` the two end samples are hard walls (psi = 0 there).
    """

    xmin: float
    xmax: float
    n: int
    walls: bool = False
    h: float = field(init=False)

    def __post_init__(self):
        if not (np.isfinite(self.xmin) and np.isfinite(self.xmax)):
            raise ValueError("grid bounds must be finite")
        if self.n < 3:
            raise ValueError(f"need at least 3 samples, got n={self.n}")
        if not self.xmax > self.xmin:
            raise ValueError("xmax must exceed xmin")
        object.__setattr__(self, "xmin", float(self.xmin))
        object.__setattr__(self, "xmax", float(self.xmax))
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "h", (self.xmax - self.xmin) / (self.n - 1))

    @property
    def symmetric(self) -> bool:
        return self.xmin == -self.xmax and self.n % 2 == 1

    @property
    def center(self) -> int:
        if not self.symmetric:
            raise ValueError("grid has no sample at x = 0")
        return (self.n - 1) // 2

    @cached_property
    def x(self) -> np.ndarray:
        if self.symmetric:
            # integer offsets times h keep x[i] == -x[n-1-i] bit for bit
            xs = (np.arange(self.n) - self.center) * self.h
        else:
            xs = self.xmin + np.arange(self.n) * self.h
        xs[0], xs[-1] = self.xmin, self.xmax
        xs.flags.writeable = False
        return xs

    def free_mask(self) -> np.ndarray:
        mask = np.ones(self.n, dtype=bool)
        if self.walls:
            mask[0] = mask[-1] = False
        return mask

    def inner(self, a, b) -> complex | float:
        """Grid-weighted inner product, conjugate-linear in ``a``."""
        return np.vdot(a, b) * self.h

    def norm(self, a) -> float:
        return float(np.sqrt(np.vdot(a, a).real * self.h))


def build_grid(xmin: float, xmax: float, n: int, walls: bool = False) -> Grid:
    return Grid(xmin, xmax, n, walls=walls)


@dataclass(frozen=True)
class BarrierInterval:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"barrier needs lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def centered(self) -> bool:
        return self.lo == -self.hi


@dataclass(frozen=True, eq=False)
class TridiagonalOperator:
    """Real symmetric tridiagonal matrix living on a subset of grid samples.

    Attributes
    ----------
    diag, offdiag : ndarray
        Main diagonal (length k) and the single off-diagonal (length k - 1).
    support : ndarray of int or None
        Grid index of each row; ``None`` means rows are the grid samples
        themselves (or an abstract basis, for multi-channel operators).
    n_grid : int
        Length of the vectors produced by :meth:`embed`.
    h : float
        Grid spacing, the quadrature weight of norms and inner products.
    parity : {None, "even", "odd"}
        Set for parity-reduced operators; :meth:`embed` then mirrors the
        half-space vector onto the full grid.
    """

    diag: np.ndarray
    offdiag: np.ndarray
    support: np.ndarray | None = None
    n_grid: int | None = None
    h: float = 1.0
    parity: str | None = None
    center_row: bool = False

    def __post_init__(self):
        d = np.array(self.diag, dtype=float)
        e = np.array(self.offdiag, dtype=float)
        if d.ndim != 1 or e.shape != (max(d.size - 1, 0),):
            raise ValueError("offdiag must have exactly len(diag) - 1 entries")
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(e))):
            raise ValueError("operator entries must be finite")
        d.flags.writeable = False
        e.flags.writeable = False
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "offdiag", e)
        if self.support is not None:
            s = np.array(self.support, dtype=np.intp)
            s.flags.writeable = False
            object.__setattr__(self, "support", s)
        if self.n_grid is None:
            object.__setattr__(self, "n_grid", d.size)

    @property
    def size(self) -> int:
        return self.diag.size

    def scale(self) -> float:
        """Largest absolute entry, a natural unit for rounding tolerances."""
        top = np.max(np.abs(self.diag)) if self.size else 0.0
        if self.offdiag.size:
            top = max(top, np.max(np.abs(self.offdiag)))
        return float(top)

    def matvec(self, u: np.ndarray) -> np.ndarray:
        """Apply to ``u`` along axis 0 (works for a stack of columns too)."""
        u = np.asarray(u)
        if u.shape[0] != self.size:
            raise ValueError(f"vector length {u.shape[0]} != operator size {self.size}")
        d = self.diag.reshape((-1,) + (1,) * (u.ndim - 1))
        e = self.offdiag.reshape((-1,) + (1,) * (u.ndim - 1))
        out = d * u
        out[:-1] += e * u[1:]
        out[1:] += e * u[:-1]
        return out

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)

    def restrict(self, psi: np.ndarray) -> np.ndarray:
        """Grid vector -> operator rows (inverse of :meth:`embed` on its range)."""
        psi = np.asarray(psi)
        if psi.shape[0] != self.n_grid:
            raise ValueError(f"state length {psi.shape[0]} != grid length {self.n_grid}")
        if self.parity is None:
            return psi if self.support is None else psi[self.support]
        u = psi[self.support] * np.sqrt(2.0)
        if self.center_row:
            u[0] = psi[self.support[0]]
        return u

    def embed(self, u: np.ndarray) -> np.ndarray:
        """Operator-row vector(s) -> full grid, zero on Dirichlet nodes."""
        u = np.asarray(u)
        if self.support is None:
            return u.copy()
        out = np.zeros((self.n_grid,) + u.shape[1:], dtype=u.dtype)
        if self.parity is None:
            out[self.support] = u
            return out
        sign = 1.0 if self.parity == "even" else -1.0
        mirror = self.n_grid - 1 - self.support
        half = u / np.sqrt(2.0)
        out[self.support] = half
        out[mirror] = sign * half
        if self.center_row:
            out[self.support[0]] = u[0]
        return out


def assemble_hamiltonian(
    grid: Grid,
    v,
    m: float = 1.0,
    hbar: float = 1.0,
    free: np.ndarray | None = None,
) -> TridiagonalOperator:
    """Three-point finite-difference Hamiltonian ``-hbar^2/2m d2/dx2 + v``.

    Parameters
    ----------
    grid : Grid
    v : array_like
        Potential at every grid sample. Entries outside ``free`` are ignored
        and may be ``inf``.
    m, hbar : float
        Mass and reduced Planck constant.
    free : bool array, optional
        Samples carrying unknowns. Defaults to all samples, minus the two
        ends when ``grid.walls`` is set. Neighbouring free samples that are
        not adjacent on the grid are left uncoupled.
    """
    v = np.asarray(v, dtype=float)
    if v.shape != (grid.n,):
        raise ValueError(f"potential has shape {v.shape}, grid has {grid.n} samples")
    if m <= 0 or hbar <= 0:
        raise ValueError("mass and hbar must be positive")
    mask = grid.free_mask() if free is None else np.asarray(free, dtype=bool) & grid.free_mask()
    support = np.flatnonzero(mask)
    if support.size == 0:
        raise ValueError("no free samples")
    vs = v[support]
    if not np.all(np.isfinite(vs)):
        raise ValueError("non-finite potential on a free sample; mask infinite regions first")
    t = hbar**2 / (2.0 * m * grid.h**2)
    adjacent = np.diff(support) == 1
    offdiag = np.where(adjacent, -t, 0.0)
    return TridiagonalOperator(2.0 * t + vs, offdiag, support=support, n_grid=grid.n, h=grid.h)


class Split(NamedTuple):
    left: Grid
    right: Grid
    snap: float  # largest distance a barrier edge moved to land on a sample


def split_domain(grid: Grid, barrier: BarrierInterval) -> Split:
    """Cut ``grid`` at an infinite barrier into two walled sub-grids.

    Barrier edges snap to the nearest grid samples, so both pieces keep
    the parent spacing and, for a centred barrier on a symmetric grid, are
    exact mirror images.
    """
    if not (grid.xmin < barrier.lo and barrier.hi < grid.xmax):
        raise ValueError(
            f"barrier [{barrier.lo}, {barrier.hi}] not inside [{grid.xmin}, {grid.xmax}]"
        )
    i_lo = int(np.rint((barrier.lo - grid.xmin) / grid.h))
    i_hi = grid.n - 1 - int(np.rint((grid.xmax - barrier.hi) / grid.h))
    if i_lo + 1 < 3 or grid.n - i_hi < 3:
        raise ValueError("a side of the split has fewer than 3 samples")
    if i_hi <= i_lo:
        raise ValueError("barrier narrower than one grid step")
    x = grid.x
    snap = max(abs(x[i_lo] - barrier.lo), abs(x[i_hi] - barrier.hi))
    left = Grid(grid.xmin, float(x[i_lo]), i_lo + 1, walls=True)
    right = Grid(float(x[i_hi]), grid.xmax, grid.n - i_hi, walls=True)
    return Split(left, right, float(snap))


def parity_sector(op: TridiagonalOperator, grid: Grid, parity: str) -> TridiagonalOperator:
    """Restrict a parity-invariant operator to its even or odd subspace.

    Even states obey psi(-x) = psi(x), so the row at x = 0 couples twice to
    its right neighbour; rescaling that sample by sqrt(2) keeps the reduced
    matrix symmetric. Odd states vanish at x = 0 and the row is dropped.
    """
    if parity not in ("even", "odd"):
        raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")
    if op.parity is not None:
        raise ValueError("operator is already parity-reduced")
    if not grid.symmetric or op.n_grid != grid.n:
        raise ValueError("parity reduction needs the operator's symmetric grid")
    s = np.arange(grid.n) if op.support is None else op.support
    if not np.array_equal(s, (grid.n - 1 - s)[::-1]):
        raise ValueError("support is not mirror symmetric")
    if not np.array_equal(op.diag, op.diag[::-1]) or not np.array_equal(op.offdiag, op.offdiag[::-1]):
        raise ValueError("operator is not parity invariant")
    c = grid.center
    p = int(np.searchsorted(s, c))
    has_center = p < s.size and s[p] == c
    if has_center and parity == "even":
        e = op.offdiag[p:].copy()
        if e.size:
            e[0] *= np.sqrt(2.0)
        return TridiagonalOperator(op.diag[p:], e, support=s[p:], n_grid=grid.n,
                                   h=op.h, parity=parity, center_row=True)
    start = p + 1 if has_center else p
    return TridiagonalOperator(op.diag[start:], op.offdiag[start:], support=s[start:],
                               n_grid=grid.n, h=op.h, parity=parity)
