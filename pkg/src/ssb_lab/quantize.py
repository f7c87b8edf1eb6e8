"""Sub-barrier levels of the finite square double well.

Even and odd bound states below the barrier height ``alpha`` solve the
matching conditions at ``x = b``::

    even:  -sqrt(E) cot(k L) - sqrt(alpha - E) tanh(kappa b) = 0
    odd:   -sqrt(E) cot(k L) - sqrt(alpha - E) coth(kappa b) = 0

with ``L = a - b``, ``k = sqrt(2 m E)/hbar`` and
``kappa = sqrt(2 m (alpha - E))/hbar``. Squaring both terms gives the
usual ``E cot^2 = (alpha - E) tanh^{+-2}`` form, which also admits
spurious roots, so the unsquared residual is the one root-found here.

Between consecutive poles of ``cot(k L)`` each residual increases
monotonically from -inf to +inf, so every pole interval below ``alpha``
holds at most one root. Roots are bisected in extended precision: at
large ``alpha`` the even-odd splitting is only a few ulps of E.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import mpmath
import numpy as np

from .eigen import eigensolve
from .lattice import parity_sector
from .models import square_double_well

__all__ = [
    "WellGeometry",
    "RootReport",
    "SweepRow",
    "even_condition",
    "odd_condition",
    "squared_condition",
    "find_subbarrier_levels",
    "fd_sector_levels",
    "splitting_sweep",
    "limit_level",
]

_DPS = 40


@dataclass(frozen=True)
class WellGeometry:
    alpha: float
    a: float
    b: float
    m: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if not (self.a > self.b > 0):
            raise ValueError(f"need a > b > 0, got a={self.a}, b={self.b}")
        if not (np.isfinite(self.alpha) and self.alpha > 0):
            raise ValueError(f"alpha must be positive and finite, got {self.alpha}")
        if self.m <= 0 or self.hbar <= 0:
            raise ValueError("mass and hbar must be positive")

    @property
    def width(self) -> float:
        return self.a - self.b

    def pole(self, j: int) -> float:
        """Energy at which ``cot(k L)`` has its j-th pole."""
        return (j * math.pi * self.hbar / self.width) ** 2 / (2.0 * self.m)


@dataclass
class RootReport:
    parity: str
    roots: list[float]
    brackets: list[tuple[float, float]]
    residuals: list[float] = field(default_factory=list)
    fd_levels: list[float] = field(default_factory=list)
    oracle_match: list[float] = field(default_factory=list)

    @property
    def fd_count(self) -> int:
        return len(self.fd_levels)


def _condition(E, g: WellGeometry, parity: str, lib=math):
    if not (0.0 < E < g.alpha):
        raise ValueError(f"E = {E} outside (0, alpha = {g.alpha})")
    c = lib.sqrt(2 * g.m) / g.hbar
    theta = g.width * c * lib.sqrt(E)
    s = lib.sin(theta)
    if s == 0:
        # at a pole of cot: the residual jumps from +inf to -inf
        return -math.copysign(math.inf, float(lib.cos(theta)))
    q = lib.sqrt(g.alpha - E)
    t = lib.tanh(g.b * c * q)
    barrier = q * t if parity == "even" else q / t
    return -lib.sqrt(E) * lib.cos(theta) / s - barrier


def even_condition(E: float, g: WellGeometry) -> float:
    return float(_condition(float(E), g, "even"))


def odd_condition(E: float, g: WellGeometry) -> float:
    return float(_condition(float(E), g, "odd"))


def squared_condition(E: float, g: WellGeometry, parity: str) -> tuple[float, float]:
    """Both sides of the squared matching condition, ``E cot^2`` and
    ``(alpha - E) tanh^{+-2}``."""
    c = math.sqrt(2 * g.m) / g.hbar
    lhs = E / math.tan(g.width * c * math.sqrt(E)) ** 2
    t = math.tanh(g.b * c * math.sqrt(g.alpha - E))
    rhs = (g.alpha - E) * (t * t if parity == "even" else 1.0 / (t * t))
    return lhs, rhs


def _bisect_mp(g: WellGeometry, parity: str, lo: float, hi: float):
    with mpmath.workdps(_DPS):
        lo, hi = mpmath.mpf(lo), mpmath.mpf(hi)
        tol = mpmath.mpf(10) ** (-_DPS + 8) * hi
        for _ in range(400):
            if hi - lo <= tol:
                break
            mid = (lo + hi) / 2
            if _condition(mid, g, parity, lib=mpmath) < 0:
                lo = mid
            else:
                hi = mid
        return (lo + hi) / 2


def _roots_mp(g: WellGeometry, parity: str):
    """Sub-barrier roots as mpmath numbers, with their double-precision brackets."""
    if parity not in ("even", "odd"):
        raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")
    roots, brackets = [], []
    j = 0
    while g.pole(j) < g.alpha:
        lo = g.pole(j)
        hi = min(g.pole(j + 1), g.alpha)
        j += 1
        # step just inside the open interval; the residual is -inf at lo
        eps = 1e-13 * hi
        a_, b_ = lo + eps if lo > 0 else eps * 1e-3, hi - eps
        if b_ <= a_:
            continue
        fa = _condition(a_, g, parity)
        fb = _condition(b_, g, parity)
        if fa < 0 < fb:
            roots.append(_bisect_mp(g, parity, a_, b_))
            brackets.append((lo, hi))
    return roots, brackets


def fd_sector_levels(g: WellGeometry, parity: str, n: int = 4001) -> np.ndarray:
    """Finite-difference levels below ``alpha`` in one parity sector.

    Solving the even and odd subspaces separately keeps every level's
    parity exact even where the doublet splitting is below rounding.
    """
    model = square_double_well(g.alpha, g.a, g.b, g.m, g.hbar)
    grid = model.grid(n)
    op = parity_sector(model.hamiltonian(grid), grid, parity)
    k = 1
    while True:
        spec = eigensolve(op, min(k, op.size), grid)
        if spec.levels[-1] >= g.alpha or k >= op.size:
            return spec.levels[spec.levels < g.alpha]
        k *= 2


def find_subbarrier_levels(g: WellGeometry, parity: str, fd_n: int | None = 4001) -> RootReport:
    """Roots of the matching condition below the barrier.

    With ``fd_n`` set, each root is compared with the finite-difference
    level of the same parity (relative error in ``oracle_match``).
    """
    mp_roots, brackets = _roots_mp(g, parity)
    roots = [float(r) for r in mp_roots]
    fn = even_condition if parity == "even" else odd_condition
    report = RootReport(parity, roots, brackets, residuals=[fn(r, g) for r in roots])
    if fd_n:
        fd = fd_sector_levels(g, parity, fd_n)
        report.fd_levels = [float(e) for e in fd]
        report.oracle_match = [abs(e - r) / r for r, e in zip(roots, fd)]
    return report


def limit_level(g: WellGeometry, n: int) -> float:
    """Level n of one infinitely deep well of width ``a - b``."""
    return g.pole(n)


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    e_even: float
    e_odd: float
    splitting: float
    present: bool


def _sweep_row(args) -> SweepRow:
    alpha, g_base, n = args
    g = replace(g_base, alpha=alpha)
    even, _ = _roots_mp(g, "even")
    odd, _ = _roots_mp(g, "odd")
    if len(even) < n or len(odd) < n:
        return SweepRow(alpha, math.nan, math.nan, math.nan, False)
    with mpmath.workdps(_DPS):
        split = odd[n - 1] - even[n - 1]
    return SweepRow(alpha, float(even[n - 1]), float(odd[n - 1]), float(split), True)


def splitting_sweep(alphas, g_base: WellGeometry, n: int = 1, jobs: int = 1) -> list[SweepRow]:
    """Doublet ``n`` (counted from 1) across barrier heights.

    The splitting is taken in extended precision before rounding to a
    float. Rows where the doublet is not yet below the barrier are kept
    and flagged with ``present=False``.
    """
    alphas = [float(a) for a in alphas]
    if any(b <= a for a, b in zip(alphas, alphas[1:])):
        raise ValueError("alphas must be strictly ascending")
    if n < 1:
        raise ValueError("doublets are numbered from 1")
    work = [(a, g_base, n) for a in alphas]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sweep_row, work))
    return [_sweep_row(w) for w in work]
