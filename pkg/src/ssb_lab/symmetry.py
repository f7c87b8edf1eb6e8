"""Symmetry operators and spontaneous-breaking diagnostics.

A level breaks a symmetry U when it holds two eigenstates L and R with
``U L = R`` and ``<L|R> = 0``. Given any symmetry-related pair ``B = U A``
that merely overlaps, such an orthogonal pair can always be rebuilt from
the even/odd combinations ``|+>`` and ``|->`` (:func:`build_nonoverlapping_pair`).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy import sparse

from .eigen import DEFAULT_DEGENERACY_TOL, Spectrum, cluster_degeneracies
from .lattice import BarrierInterval, Grid, TridiagonalOperator

__all__ = [
    "SymmetryOp",
    "SSBVerdict",
    "SymmetryError",
    "Projection",
    "parity",
    "sigma3",
    "involution",
    "random_involution",
    "parity_apply",
    "commutator_norm",
    "symmetric_basis",
    "build_nonoverlapping_pair",
    "symmetry_respecting_pair",
    "project_right",
    "detect_ssb",
]


class SymmetryError(ValueError):
    pass


@dataclass(frozen=True)
class SymmetryOp:
    """A unitary involution acting along axis 0 of state arrays."""

    kind: str
    action: Callable[[np.ndarray], np.ndarray]
    size: int

    def __call__(self, psi):
        psi = np.asarray(psi)
        if psi.shape[0] != self.size:
            raise ValueError(f"{self.kind} acts on length {self.size}, got {psi.shape[0]}")
        return self.action(psi)


def parity(grid: Grid) -> SymmetryOp:
    if not grid.symmetric:
        raise SymmetryError("parity needs a symmetric grid (xmin = -xmax, n odd)")
    return SymmetryOp("Parity", lambda psi: psi[::-1].copy(), grid.n)


def sigma3(n: int) -> SymmetryOp:
    """``diag(1, -1)`` on spinors stored as ``concatenate([up, down])``."""

    def act(psi):
        out = psi.copy()
        out[n:] *= -1
        return out

    return SymmetryOp("Sigma3", act, 2 * n)


def involution(u, atol: float = 1e-12) -> SymmetryOp:
    """Wrap a dense matrix, checking it is unitary and squares to one."""
    u = np.asarray(u)
    eye = np.eye(u.shape[0])
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise SymmetryError("need a square matrix")
    if not np.allclose(u @ u, eye, rtol=0, atol=atol):
        raise SymmetryError("matrix does not square to the identity")
    if not np.allclose(u.conj().T @ u, eye, rtol=0, atol=atol):
        raise SymmetryError("matrix is not unitary")
    return SymmetryOp("Custom", lambda psi: u @ psi, u.shape[0])


def random_involution(dim: int, rng: np.random.Generator, complex_: bool = False):
    """Random unitary involution ``Q diag(+-1) Q^dagger`` with both signs present.

    Returns the matrix and orthonormal bases of its +1 and -1 eigenspaces.
    """
    if dim < 2:
        raise ValueError("need dim >= 2 for both eigenvalues to appear")
    z = rng.normal(size=(dim, dim))
    if complex_:
        z = z + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    n_plus = int(rng.integers(1, dim))
    signs = np.r_[np.ones(n_plus), -np.ones(dim - n_plus)]
    u = (q * signs) @ q.conj().T
    return u, q[:, :n_plus], q[:, n_plus:]


def parity_apply(psi, grid: Grid) -> np.ndarray:
    return parity(grid)(psi)


def _apply(op, x):
    if isinstance(op, TridiagonalOperator):
        return op.matvec(x)
    if callable(op):
        return op(x)
    return np.asarray(op) @ x


def commutator_norm(op, u: SymmetryOp, grid: Grid | None = None, chunk: int = 512) -> float:
    """``max_i ||(H U - U H) e_i||`` over the unit basis.

    ``op`` may be a :class:`TridiagonalOperator`, a dense matrix, or any
    callable that applies H along axis 0. For a tridiagonal operator on a
    reduced support, U acts on the full grid and the operator rows are
    scattered into it.
    """
    if isinstance(op, TridiagonalOperator):
        if op.parity is not None:
            raise ValueError("commutator of a parity-reduced operator is not defined")
        n = op.n_grid
        mat = sparse.diags([op.offdiag, op.diag, op.offdiag], [-1, 0, 1], format="csr")
        if op.support is not None:
            # scatter onto the full grid; Dirichlet nodes get zero rows and columns
            scatter = sparse.csr_matrix(
                (np.ones(op.size), (op.support, np.arange(op.size))), shape=(n, op.size)
            )
            mat = (scatter @ mat @ scatter.T).tocsr()
        apply_h = mat.__matmul__
    else:
        apply_h = lambda x: _apply(op, x)  # noqa: E731
        n = u.size
    if u.size != n:
        raise ValueError(f"symmetry acts on length {u.size}, operator on {n}")
    worst = 0.0
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        e = np.zeros((n, stop - start))
        e[np.arange(start, stop), np.arange(stop - start)] = 1.0
        c = apply_h(u(e)) - u(apply_h(e))
        worst = max(worst, float(np.max(np.linalg.norm(c, axis=0))))
    return worst


def _inner(a, b, h):
    return np.vdot(a, b) * h


def symmetric_basis(A, B, h: float = 1.0):
    """Normalised ``|+> ~ A + B`` and ``|-> ~ A - B`` for a pair with B = U A.

    U is a Hermitian involution, so ``<A|B> = <A|U A>`` is real.
    """
    A = np.asarray(A)
    B = np.asarray(B)
    c = _inner(A, B, h)
    if abs(np.imag(c)) > 1e-12:
        raise SymmetryError(f"<A|B> = {c} is not real; B is not U A for a unitary involution")
    c = float(np.real(c))
    if abs(c) >= 1.0 - 1e-12:
        raise SymmetryError(f"A and B are collinear (<A|B> = {c:.15f}); no pair exists")
    plus = (A + B) / np.sqrt(2.0 * (1.0 + c))
    minus = (A - B) / np.sqrt(2.0 * (1.0 - c))
    return plus, minus


def build_nonoverlapping_pair(A, B, u: SymmetryOp, h: float = 1.0, tol: float = 1e-10):
    """Orthogonal pair ``(L, R)`` with ``U L = R`` spanning ``{A, B}``.

    Raises
    ------
    SymmetryError
        If ``B`` is not ``U A`` to within ``tol``, or the two are collinear.
    """
    A = np.asarray(A)
    B = np.asarray(B)
    mismatch = np.sqrt(np.vdot(B - u(A), B - u(A)).real * h)
    if mismatch > tol:
        raise SymmetryError(f"||B - U A|| = {mismatch:.3e} exceeds {tol:.1e}")
    plus, minus = symmetric_basis(A, B, h)
    L = (plus + minus) / np.sqrt(2.0)
    R = (plus - minus) / np.sqrt(2.0)
    return L, R


def symmetry_respecting_pair(L, R, h: float = 1.0, tol: float = 1e-10):
    """``(L + R)/sqrt2, (L - R)/sqrt2`` for an orthonormal symmetry-breaking pair."""
    overlap = abs(_inner(L, R, h))
    if overlap > tol:
        raise SymmetryError(f"|<L|R>| = {overlap:.3e}; inputs are not orthogonal")
    L = np.asarray(L)
    R = np.asarray(R)
    return (L + R) / np.sqrt(2.0), (L - R) / np.sqrt(2.0)


class Projection(NamedTuple):
    state: np.ndarray
    trivial: bool  # right half was empty; state is the input, to be paired with its mirror


def project_right(psi, grid: Grid, barrier: BarrierInterval | None = None) -> Projection:
    """Keep ``x >= 0`` and renormalise.

    For a parity-symmetric potential with an infinite central barrier the
    result is again an eigenstate of the same level. The step is 1 at
    x = 0; on these grids that sample lies inside the barrier anyway.
    """
    if not grid.symmetric:
        raise SymmetryError("projection needs a symmetric grid")
    if barrier is not None and not barrier.centered:
        raise SymmetryError("barrier must be centred on x = 0")
    psi = np.asarray(psi)
    total = grid.norm(psi)
    if total == 0.0:
        raise SymmetryError("state has zero norm")
    kept = np.where(grid.x >= 0, psi, 0)
    nrm = grid.norm(kept)
    if nrm == 0.0:
        return Projection(psi.copy(), True)
    return Projection(kept / nrm, False)


@dataclass(frozen=True)
class SSBVerdict:
    ground_multiplicity: int
    commutator_norm: float | None
    pair: tuple[np.ndarray, np.ndarray] | None
    pair_overlap: float
    broken: bool
    tol: float
    symmetry: str

    def summary(self) -> dict:
        return {
            "symmetry": self.symmetry,
            "ground_multiplicity": self.ground_multiplicity,
            "commutator_norm": self.commutator_norm,
            "pair_overlap": self.pair_overlap,
            "broken": self.broken,
            "tol": self.tol,
        }


def detect_ssb(spectrum: Spectrum, u: SymmetryOp, tol: float = DEFAULT_DEGENERACY_TOL,
               commutator_tol: float | None = None) -> SSBVerdict:
    """Decide whether the ground level spontaneously breaks ``u``.

    The eigensolver basis of a degenerate ground cluster is arbitrary, so
    candidates ``A`` are drawn from the cluster (its members, then sums of
    pairs of members) until ``B = U A`` is not collinear with ``A``; an
    overlapping pair is then rotated into an orthogonal one.

    Raises
    ------
    SymmetryError
        If ``u`` does not commute with the spectrum's operator, or ``U A``
        leaves the ground eigenspace (inconsistent input).
    """
    if len(spectrum) < 2:
        raise ValueError("need at least two levels")
    h = spectrum.h
    comm = None
    if spectrum.op is not None:
        comm = commutator_norm(spectrum.op, u, spectrum.gridref)
        ctol = commutator_tol if commutator_tol is not None else 1e-12 * max(spectrum.op.scale(), 1.0)
        if comm > ctol:
            raise SymmetryError(f"[H, U] norm {comm:.3e} > {ctol:.1e}: U is not a symmetry")
    ground = cluster_degeneracies(spectrum.levels, tol).clusters[0]
    vecs = spectrum.vectors[list(ground.members)]
    mult = ground.multiplicity

    if mult < 2:
        v = vecs[0]
        overlap = float(abs(_inner(v, u(v), h)))
        return SSBVerdict(mult, comm, None, overlap, False, tol, u.kind)

    candidates = [vecs[i] for i in range(mult)]
    candidates += [(vecs[i] + vecs[j]) / np.sqrt(2.0) for i in range(mult) for j in range(i + 1, mult)]
    for A in candidates:
        B = u(A)
        coeffs = vecs.conj() @ B * h
        leak = np.sqrt(max(np.vdot(B, B).real * h - np.sum(np.abs(coeffs) ** 2), 0.0))
        if leak > max(tol, 1e-6):
            raise SymmetryError(f"U maps a ground state out of the ground eigenspace (leak {leak:.2e})")
        c = float(np.real(_inner(A, B, h)))
        if abs(c) >= 1.0 - 1e-9:
            continue
        if abs(c) <= tol:
            L, R = A, B
        else:
            L, R = build_nonoverlapping_pair(A, B, u, h=h, tol=max(tol, 1e-10))
        overlap = float(abs(_inner(L, R, h)))
        mismatch = float(np.sqrt(np.vdot(u(L) - R, u(L) - R).real * h))
        broken = overlap <= tol and mismatch <= tol
        return SSBVerdict(mult, comm, (L, R), overlap, broken, tol, u.kind)
    # every candidate is U-symmetric: the degeneracy is not a broken U
    return SSBVerdict(mult, comm, None, 1.0, False, tol, u.kind)
