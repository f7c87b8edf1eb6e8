"""Potential catalogue: sombreros, the factorized sextic, double wells.

Every potential here is even in x. Infinite regions (hard walls, the
impenetrable central barrier) evaluate to ``inf`` and become Dirichlet
nodes when a Hamiltonian is assembled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .lattice import BarrierInterval, Grid, TridiagonalOperator, assemble_hamiltonian, build_grid

__all__ = [
    "KINDS",
    "AnalyticOracle",
    "PotentialModel",
    "GridTooCoarse",
    "quartic_sombrero",
    "sextic_factorized",
    "annihilator_residual",
    "double_oscillator",
    "square_double_well",
    "double_infinite_well",
    "uinf_eigenfunction",
    "model_from_dict",
]

KINDS = (
    "QuarticSombrero",
    "SexticFactorized",
    "DoubleOscillator",
    "SquareDoubleWell",
    "DoubleInfiniteWell",
)


class GridTooCoarse(ValueError):
    pass


@dataclass(frozen=True)
class AnalyticOracle:
    ground_energy: float | None = None
    ground_function: Callable[[np.ndarray], np.ndarray] | None = None
    level_formula: Callable[[int], float] | None = None
    level_multiplicity: int = 1


@dataclass(frozen=True, eq=False)
class PotentialModel:
    kind: str
    params: dict
    domain_hint: tuple[float, float]
    m: float = 1.0
    hbar: float = 1.0
    walls: bool = False
    barrier: BarrierInterval | None = None
    analytic: AnalyticOracle | None = None
    _fn: Callable[[np.ndarray], np.ndarray] = field(default=None, repr=False)

    def __call__(self, x) -> np.ndarray:
        return self._fn(np.asarray(x, dtype=float))

    def grid(self, n: int) -> Grid:
        """Grid over the model's natural domain; odd ``n`` keeps x = 0 on it."""
        return build_grid(self.domain_hint[0], self.domain_hint[1], n, walls=self.walls)

    def sample(self, grid: Grid) -> np.ndarray:
        """Potential values for the finite-difference operator.

        Identical to evaluation at the samples except for the finite step of
        the square double well, which is cell-averaged so that a jump sitting
        on a sample gets half its height.
        """
        v = self(grid.x)
        if self.kind == "SquareDoubleWell":
            alpha, b = self.params["alpha"], self.params["b"]
            lo = np.maximum(grid.x - grid.h / 2, -b)
            hi = np.minimum(grid.x + grid.h / 2, b)
            frac = np.clip(hi - lo, 0.0, None) / grid.h
            inside = np.isfinite(v)
            v = np.where(inside, alpha * frac, v)
        return v

    def hamiltonian(self, grid: Grid) -> TridiagonalOperator:
        v = self.sample(grid)
        return assemble_hamiltonian(grid, np.where(np.isfinite(v), v, 0.0), self.m, self.hbar,
                                    free=np.isfinite(v))

    def to_dict(self) -> dict:
        return {"kind": self.kind, **self.params, "m": self.m, "hbar": self.hbar}


def _positive(**kw):
    for name, val in kw.items():
        if not (np.isfinite(val) and val > 0):
            raise ValueError(f"{name} must be positive and finite, got {val!r}")


def quartic_sombrero(lam: float = 1.0, mu: float = 1.0, m: float = 1.0,
                     hbar: float = 1.0) -> PotentialModel:
    """``V = lam x^4 - mu x^2``."""
    _positive(lam=lam, mu=mu, m=m, hbar=hbar)
    # ground state decays on the quartic length lam^(-1/6); minima at sqrt(mu/2lam)
    scale = max(lam ** (-1.0 / 6.0), math.sqrt(mu / lam))
    half = 4.0 * scale
    return PotentialModel(
        "QuarticSombrero",
        {"lam": lam, "mu": mu},
        (-half, half),
        m=m,
        hbar=hbar,
        _fn=lambda x: lam * x**4 - mu * x**2,
    )


def sextic_factorized(a: float = 1.0, m: float = 1.0, hbar: float = 1.0) -> PotentialModel:
    """Sombrero whose exact ground state is ``exp(-a x^4)`` at zero energy.

    ``V = hbar^2/2m (16 a^2 x^6 - 12 a x^2)`` comes from writing
    ``H = hbar^2/2m q^dagger q`` with ``q = -i d/dx - 4 i a x^3``.
    """
    _positive(a=a, m=m, hbar=hbar)
    pref = hbar**2 / (2.0 * m)
    # int exp(-2 a x^4) dx over the real line
    norm2 = math.gamma(0.25) / (2.0 * (2.0 * a) ** 0.25)
    inv_root = 1.0 / math.sqrt(norm2)

    def ground(x):
        return inv_root * np.exp(-a * np.asarray(x, dtype=float) ** 4)

    half = 4.0 * a ** (-0.25)
    return PotentialModel(
        "SexticFactorized",
        {"a_sextic": a},
        (-half, half),
        m=m,
        hbar=hbar,
        analytic=AnalyticOracle(ground_energy=0.0, ground_function=ground),
        _fn=lambda x: pref * (16.0 * a * a * x**6 - 12.0 * a * x**2),
    )


def annihilator_residual(a: float, grid: Grid) -> float:
    """Grid norm of ``q f`` for ``f = exp(-a x^4)``, derivative by central differences.

    The exact result is zero; what remains is the O(h^2) stencil error.

    Raises
    ------
    GridTooCoarse
        When the grid does not cover the support of ``f`` or the residual
        exceeds twice its leading-order error estimate ``h^2/6 ||f'''||``.
    """
    _positive(a=a)
    if not grid.symmetric:
        raise ValueError("need a symmetric grid")
    x = grid.x
    f = np.exp(-a * x**4)
    if f[0] > 1e-12:
        raise GridTooCoarse(f"f = {f[0]:.2e} at the domain edge; widen the grid")
    xi = x[1:-1]
    df = (f[2:] - f[:-2]) / (2.0 * grid.h)
    r = df + 4.0 * a * xi**3 * f[1:-1]  # q f = -i (f' + 4 a x^3 f)
    res = float(np.sqrt(np.sum(r * r) * grid.h))
    f3 = (-24.0 * a * xi + 144.0 * a**2 * xi**5 - 64.0 * a**3 * xi**9) * f[1:-1]
    estimate = grid.h**2 / 6.0 * float(np.sqrt(np.sum(f3 * f3) * grid.h))
    if res > 2.0 * estimate + 1e-14:
        raise GridTooCoarse(f"residual {res:.3e} above O(h^2) bound {2 * estimate:.3e}")
    return res


def double_oscillator(m: float = 1.0, omega: float = 1.0, a: float = 1.0,
                      hbar: float = 1.0) -> PotentialModel:
    """``V = m omega^2 (|x| - a)^2``; the kink at x = 0 is sampled as is."""
    _positive(m=m, omega=omega, hbar=hbar)
    if not (np.isfinite(a) and a >= 0):
        raise ValueError(f"separation a must be >= 0, got {a!r}")
    half = a + 6.0 / math.sqrt(m * omega / hbar)
    return PotentialModel(
        "DoubleOscillator",
        {"omega": omega, "a": a},
        (-half, half),
        m=m,
        hbar=hbar,
        _fn=lambda x: m * omega**2 * (np.abs(x) - a) ** 2,
    )


def _well_geometry(a, b):
    if not (np.isfinite(a) and np.isfinite(b) and a > b > 0):
        raise ValueError(f"need a > b > 0, got a={a!r}, b={b!r}")


def square_double_well(alpha: float, a: float, b: float, m: float = 1.0,
                       hbar: float = 1.0) -> PotentialModel:
    """Walls at ``|x| >= a``, a barrier of height ``alpha`` on ``|x| <= b``."""
    _well_geometry(a, b)
    if not (np.isfinite(alpha) and alpha >= 0):
        raise ValueError(f"alpha must be finite and >= 0, got {alpha!r}")
    _positive(m=m, hbar=hbar)

    def fn(x):
        ax = np.abs(x)
        return np.where(ax >= a, np.inf, np.where(ax <= b, alpha, 0.0))

    return PotentialModel(
        "SquareDoubleWell",
        {"alpha": alpha, "a": a, "b": b},
        (-a, a),
        m=m,
        hbar=hbar,
        walls=True,
        _fn=fn,
    )


def double_infinite_well(a: float, b: float, m: float = 1.0, hbar: float = 1.0) -> PotentialModel:
    """Two hard-walled boxes ``(-a, -b)`` and ``(b, a)``.

    Each level ``pi^2 hbar^2 n^2 / (2 m (a - b)^2)`` is doubly degenerate.
    """
    _well_geometry(a, b)
    _positive(m=m, hbar=hbar)
    width = a - b

    def level(n: int) -> float:
        if n < 1:
            raise ValueError("levels are numbered from 1")
        return math.pi**2 * hbar**2 * n**2 / (2.0 * m * width**2)

    def fn(x):
        ax = np.abs(x)
        return np.where((ax >= a) | (ax <= b), np.inf, 0.0)

    return PotentialModel(
        "DoubleInfiniteWell",
        {"a": a, "b": b},
        (-a, a),
        m=m,
        hbar=hbar,
        walls=True,
        barrier=BarrierInterval(-b, b),
        analytic=AnalyticOracle(level_formula=level, level_multiplicity=2),
        _fn=fn,
    )


def uinf_eigenfunction(n: int, side: str, a: float, b: float, grid: Grid) -> np.ndarray:
    """Closed-form eigenfunction of level ``n`` confined to one well.

    The right-well function is defined as the mirror image of the left one,
    so that parity maps one onto the other sample by sample.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if side not in ("L", "R"):
        raise ValueError(f"side must be 'L' or 'R', got {side!r}")
    _well_geometry(a, b)
    if not (np.isclose(grid.xmin, -a) and np.isclose(grid.xmax, a)):
        raise ValueError(f"grid [{grid.xmin}, {grid.xmax}] does not span [-a, a]")
    width = a - b
    x = grid.x if side == "L" else -grid.x
    inside = (x > -a) & (x < -b)
    psi = np.where(inside, math.sqrt(2.0 / width) * np.sin(math.pi * n * (x + a) / width), 0.0)
    return psi / grid.norm(psi)


_BUILDERS = {
    "QuarticSombrero": (quartic_sombrero, {"lambda": "lam"}),
    "SexticFactorized": (sextic_factorized, {"a_sextic": "a"}),
    "DoubleOscillator": (double_oscillator, {}),
    "SquareDoubleWell": (square_double_well, {}),
    "DoubleInfiniteWell": (double_infinite_well, {}),
}


def model_from_dict(spec: dict) -> PotentialModel:
    """Inverse of :meth:`PotentialModel.to_dict`; unknown keys are rejected."""
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind not in _BUILDERS:
        raise ValueError(f"unknown model kind {kind!r}; expected one of {KINDS}")
    builder, aliases = _BUILDERS[kind]
    kwargs = {aliases.get(k, k): v for k, v in spec.items()}
    try:
        return builder(**kwargs)
    except TypeError as exc:
        raise ValueError(f"bad parameters for {kind}: {exc}") from None
