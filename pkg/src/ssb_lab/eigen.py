"""Symmetric tridiagonal eigensolver and degeneracy bookkeeping.

Eigenvalues come from bisection on Sturm sequence counts, eigenvectors
from inverse iteration. Near-degenerate levels (the double-well doublets)
are the hard case here, so vectors whose eigenvalues sit close together
are re-orthogonalised against each other, and the matrix is first split
into independent blocks wherever an off-diagonal entry vanishes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numba import njit
from scipy.linalg import LinAlgError, solve_banded

from .lattice import Grid, TridiagonalOperator

__all__ = [
    "Spectrum",
    "Cluster",
    "DegeneracyReport",
    "EigenSolverError",
    "DEFAULT_DEGENERACY_TOL",
    "eigensolve",
    "eigenvalues_bisect",
    "cluster_degeneracies",
    "residual_norm",
    "solver_tolerance",
    "jacobi_eigvalsh",
]

DEFAULT_DEGENERACY_TOL = 1e-8
_EPS = np.finfo(float).eps
_MAX_BISECT = 256
_INVIT_STEPS = 4


class EigenSolverError(RuntimeError):
    pass


@njit(cache=True)
def _sturm_count(d, e2, x, pivmin):
    # number of eigenvalues strictly below x
    count = 0
    q = d[0] - x
    if abs(q) < pivmin:
        q = -pivmin
    if q < 0.0:
        count += 1
    for i in range(1, d.size):
        q = d[i] - x - e2[i - 1] / q
        if abs(q) < pivmin:
            q = -pivmin
        if q < 0.0:
            count += 1
    return count


@njit(cache=True)
def _bisect_range(d, e2, lo0, hi0, first, last, pivmin, out):
    """Eigenvalues ``first..last`` (0-based, ascending). Returns 0 on success."""
    for j in range(first, last + 1):
        lo = lo0
        hi = hi0
        converged = False
        for _ in range(_MAX_BISECT):
            width = hi - lo
            tol = 2.0 * _EPS * max(abs(lo), abs(hi)) + 4.0 * pivmin
            mid = lo + 0.5 * width
            if width <= tol or mid <= lo or mid >= hi:
                converged = True
                break
            if _sturm_count(d, e2, mid, pivmin) <= j:
                lo = mid
            else:
                hi = mid
        if not converged:
            return j + 1
        out[j - first] = lo + 0.5 * (hi - lo)
        # later eigenvalues lie above this one
        lo0 = max(lo0, lo)
    return 0


def _gershgorin(d: np.ndarray, e: np.ndarray) -> tuple[float, float]:
    r = np.zeros_like(d)
    r[:-1] += np.abs(e)
    r[1:] += np.abs(e)
    lo, hi = float(np.min(d - r)), float(np.max(d + r))
    pad = 2.0 * _EPS * max(abs(lo), abs(hi)) + 1e-300
    return lo - pad, hi + pad


def eigenvalues_bisect(d: np.ndarray, e: np.ndarray, k: int) -> np.ndarray:
    """``k`` smallest eigenvalues of an unreduced block by Sturm bisection."""
    d = np.ascontiguousarray(d, dtype=float)
    e = np.ascontiguousarray(e, dtype=float)
    if d.size == 1:
        return d[:1].copy()
    e2 = e * e
    pivmin = np.finfo(float).tiny * max(1.0, float(np.max(e2)) if e2.size else 1.0)
    lo, hi = _gershgorin(d, e)
    out = np.empty(k)
    failed = _bisect_range(d, e2, lo, hi, 0, k - 1, pivmin, out)
    if failed:
        raise EigenSolverError(f"bisection for eigenvalue {failed - 1} did not converge")
    return out


def _split_blocks(d: np.ndarray, e: np.ndarray) -> list[tuple[int, int]]:
    """Index ranges of the unreduced blocks of a tridiagonal matrix."""
    tiny = _EPS * (np.abs(d[:-1]) + np.abs(d[1:]))
    cuts = np.flatnonzero(np.abs(e) <= tiny) + 1
    bounds = np.concatenate(([0], cuts, [d.size]))
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:])]


def _inverse_iteration(d, e, lams, scale, seed=0):
    """Eigenvectors of one unreduced block for sorted eigenvalues ``lams``."""
    n = d.size
    vecs = np.empty((lams.size, n))
    if n == 1:
        vecs[:] = 1.0
        return vecs
    rng = np.random.default_rng(seed)
    ab = np.zeros((3, n))
    ab[0, 1:] = e
    ab[2, :-1] = e
    ortol = 1e-3 * scale
    group_start = 0
    for j, lam in enumerate(lams):
        if j > 0 and lam - lams[j - 1] > ortol:
            group_start = j
        shift = lam
        ab[1] = d - shift
        x = rng.uniform(-1.0, 1.0, n)
        for _ in range(_INVIT_STEPS):
            try:
                y = solve_banded((1, 1), ab, x, check_finite=False)
            except (LinAlgError, ValueError):
                shift = shift + 8.0 * _EPS * max(scale, abs(shift))
                ab[1] = d - shift
                continue
            for i in range(group_start, j):
                y -= np.dot(vecs[i], y) * vecs[i]
            nrm = np.linalg.norm(y)
            if not np.isfinite(nrm) or nrm == 0.0:
                raise EigenSolverError(f"inverse iteration broke down at eigenvalue {lam!r}")
            x = y / nrm
        vecs[j] = x
    return vecs


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Lowest eigenpairs of a discretised Hamiltonian.

    ``vectors[i]`` is the i-th eigenfunction sampled on the full grid (or on
    all channels, for spinor operators), normalised so that
    ``sum(|psi|^2) * h == 1``.
    """

    levels: np.ndarray
    vectors: np.ndarray
    gridref: Grid
    op: TridiagonalOperator | None = None
    residuals: np.ndarray | None = None

    @property
    def h(self) -> float:
        return self.gridref.h

    def __len__(self):
        return self.levels.size


def solver_tolerance(op: TridiagonalOperator) -> float:
    """Bound on ``|H psi - E psi|`` expected from rounding alone."""
    return 64.0 * _EPS * max(op.scale(), 1.0) * np.sqrt(op.size)


def _fix_sign(v: np.ndarray) -> np.ndarray:
    idx = np.flatnonzero(np.abs(v) > 1e-12)
    if idx.size and v[idx[0]] < 0:
        v = -v
    return v


def eigensolve(op: TridiagonalOperator, k: int, grid: Grid) -> Spectrum:
    """The ``k`` lowest eigenpairs of ``op``.

    Raises
    ------
    EigenSolverError
        If bisection fails to converge or a computed pair misses the
        rounding-level residual bound.
    """
    if not 1 <= k <= op.size:
        raise ValueError(f"k must lie in [1, {op.size}], got {k}")
    if op.n_grid % grid.n:
        raise ValueError("operator does not live on this grid")
    d, e = op.diag, op.offdiag
    scale = max(op.scale(), np.finfo(float).tiny)
    cand_vals, cand_vecs = [], []
    for a, b in _split_blocks(d, e):
        kb = min(k, b - a)
        lams = eigenvalues_bisect(d[a:b], e[a:b - 1], kb)
        vb = _inverse_iteration(d[a:b], e[a:b - 1], lams, scale)
        full = np.zeros((kb, op.size))
        full[:, a:b] = vb
        cand_vals.append(lams)
        cand_vecs.append(full)
    vals = np.concatenate(cand_vals)
    vecs = np.concatenate(cand_vecs)
    order = np.argsort(vals, kind="stable")[:k]
    vals, rows = vals[order], vecs[order]

    residuals = np.linalg.norm(op.matvec(rows.T) - rows.T * vals, axis=0)
    tol = solver_tolerance(op)
    if np.any(residuals > tol):
        worst = int(np.argmax(residuals))
        raise EigenSolverError(
            f"eigenpair {worst} residual {residuals[worst]:.3e} exceeds {tol:.3e}"
        )
    out = np.empty((k, op.n_grid))
    for i in range(k):
        psi = op.embed(rows[i])
        psi /= np.sqrt(np.dot(psi, psi) * grid.h)
        out[i] = _fix_sign(psi)
    vals.flags.writeable = False
    out.flags.writeable = False
    return Spectrum(vals, out, grid, op=op, residuals=residuals)


class Cluster(NamedTuple):
    energy: float
    multiplicity: int
    members: tuple[int, ...]


@dataclass(frozen=True)
class DegeneracyReport:
    clusters: list[Cluster]
    tol: float

    @property
    def multiplicities(self) -> list[int]:
        return [c.multiplicity for c in self.clusters]


def cluster_degeneracies(levels, tol: float = DEFAULT_DEGENERACY_TOL) -> DegeneracyReport:
    """Group sorted levels; a gap larger than ``tol`` starts a new cluster."""
    levels = np.asarray(levels, dtype=float)
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    if levels.size and np.any(np.diff(levels) < 0):
        raise ValueError("levels must be sorted ascending")
    clusters: list[Cluster] = []
    members: list[int] = []
    for i in range(levels.size):
        if members and levels[i] - levels[i - 1] > tol:
            clusters.append(_close(levels, members))
            members = []
        members.append(i)
    if members:
        clusters.append(_close(levels, members))
    return DegeneracyReport(clusters, tol)


def _close(levels, members):
    return Cluster(float(np.mean(levels[members])), len(members), tuple(members))


def residual_norm(op: TridiagonalOperator, psi, e: float) -> float:
    """Grid-weighted ``||H psi - e psi||``.

    ``psi`` may be given on the operator rows or on the full grid. A grid
    state with weight on a Dirichlet node is outside the operator's domain
    and gets an infinite residual.
    """
    psi = np.asarray(psi)
    if psi.shape == (op.size,):
        u = psi
    elif psi.shape == (op.n_grid,):
        u = op.restrict(psi)
        if not np.allclose(op.embed(u), psi, rtol=0.0, atol=1e-300):
            return float("inf")
    else:
        raise ValueError(f"state length {psi.shape} matches neither operator nor grid")
    r = op.matvec(u) - e * u
    return float(np.sqrt(np.vdot(r, r).real * op.h))


@njit(cache=True)
def _jacobi_sweeps(a, tol, max_sweeps):
    n = a.shape[0]
    for _ in range(max_sweeps):
        off = 0.0
        total = 0.0
        for i in range(n):
            for j in range(n):
                total += a[i, j] * a[i, j]
                if j < i:
                    off += a[i, j] * a[i, j]
        if np.sqrt(off) <= tol * max(np.sqrt(total), 1e-300):
            return True
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if theta != 0.0:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                else:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    rp, rq = a[p, k], a[q, k]
                    a[p, k] = c * rp - s * rq
                    a[q, k] = s * rp + c * rq
                for k in range(n):
                    cp, cq = a[k, p], a[k, q]
                    a[k, p] = c * cp - s * cq
                    a[k, q] = s * cp + c * cq
    return False


def jacobi_eigvalsh(a, tol: float = 1e-15, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a small dense symmetric matrix by cyclic Jacobi rotations.

    Simple on purpose: it shares no code with the tridiagonal path and
    serves as its brute-force reference.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n) or not np.allclose(a, a.T, rtol=0, atol=0):
        raise ValueError("need a square symmetric matrix")
    if _jacobi_sweeps(a, tol, max_sweeps):
        return np.sort(np.diag(a))
    raise EigenSolverError("Jacobi iteration did not converge")
