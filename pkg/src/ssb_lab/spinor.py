"""Two-channel oscillator with a spontaneously broken internal symmetry.

Each spin channel is a harmonic oscillator shifted down by its own zero
point energy, ``H_pm = p^2/2m + m w_pm^2 x^2/2 - hbar w_pm/2``, so both
ground states sit at E = 0 while the excited ladders ``hbar n w_pm`` never
meet when ``w_+/w_-`` is irrational. sigma_3 commutes with the block
diagonal Hamiltonian and is broken only by the doubly degenerate ground
level.

Spinors are stored as one array ``concatenate([up, down])``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .eigen import Spectrum
from .lattice import Grid, TridiagonalOperator, assemble_hamiltonian
from .symmetry import commutator_norm, sigma3

__all__ = [
    "GOLDEN",
    "CommensurabilityWarning",
    "SpinorModel",
    "SpinorState",
    "SpinorLevel",
    "FieldForm",
    "build_spinor_model",
    "hermite_functions",
    "hamiltonian",
    "analytic_spectrum",
    "analytic_spinor_spectrum",
    "ground_pair",
    "sigma3_commutator_check",
    "to_field_form",
]

GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0


class CommensurabilityWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SpinorModel:
    omega_plus: float = GOLDEN
    omega_minus: float = 1.0
    m: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("omega_plus", "omega_minus", "m", "hbar"):
            val = getattr(self, name)
            if not (np.isfinite(val) and val > 0):
                raise ValueError(f"{name} must be positive and finite, got {val!r}")

    @property
    def ratio(self) -> float:
        return self.omega_plus / self.omega_minus

    def commensurate(self, qmax: int = 64, atol: float = 1e-9) -> Fraction | None:
        """A fraction p/q (p, q <= qmax) within ``atol`` of the frequency ratio."""
        r = self.ratio
        for q in range(1, qmax + 1):
            p = round(r * q)
            if 1 <= p <= qmax and abs(r - p / q) <= atol:
                return Fraction(p, q)
        return None

    def omega(self, channel: str) -> float:
        return {"+": self.omega_plus, "-": self.omega_minus}[channel]


def build_spinor_model(omega_plus: float = GOLDEN, omega_minus: float = 1.0,
                       m: float = 1.0, hbar: float = 1.0) -> SpinorModel:
    model = SpinorModel(omega_plus, omega_minus, m, hbar)
    frac = model.commensurate()
    if frac is not None:
        warnings.warn(
            f"frequency ratio {model.ratio!r} is within 1e-9 of {frac}; "
            "excited levels of the two channels will coincide",
            CommensurabilityWarning,
            stacklevel=2,
        )
    return model


@dataclass(frozen=True, eq=False)
class SpinorState:
    up: np.ndarray
    down: np.ndarray
    h: float

    @classmethod
    def from_stacked(cls, psi, h: float) -> "SpinorState":
        psi = np.asarray(psi)
        n = psi.size // 2
        return cls(psi[:n].copy(), psi[n:].copy(), h)

    @property
    def stacked(self) -> np.ndarray:
        return np.concatenate([self.up, self.down])

    def norm(self) -> float:
        return float(np.sqrt((np.vdot(self.up, self.up) + np.vdot(self.down, self.down)).real * self.h))

    def inner(self, other: "SpinorState") -> float:
        return float(np.real(np.vdot(self.stacked, other.stacked)) * self.h)


class SpinorLevel(NamedTuple):
    n: int
    channel: str
    energy: float


def hermite_functions(nmax: int, x, m: float, omega: float, hbar: float) -> np.ndarray:
    """Normalised oscillator eigenfunctions ``psi_0..psi_nmax`` at ``x``.

    Uses the three-term recurrence of the normalised functions, which stays
    finite where raw Hermite polynomials would overflow.
    """
    x = np.asarray(x, dtype=float)
    xi = math.sqrt(m * omega / hbar) * x
    out = np.empty((nmax + 1, x.size))
    out[0] = (m * omega / (math.pi * hbar)) ** 0.25 * np.exp(-0.5 * xi * xi)
    if nmax >= 1:
        out[1] = math.sqrt(2.0) * xi * out[0]
    for k in range(1, nmax):
        out[k + 1] = math.sqrt(2.0 / (k + 1)) * xi * out[k] - math.sqrt(k / (k + 1)) * out[k - 1]
    return out


def _channel_potential(x, m, omega, hbar):
    return 0.5 * m * omega**2 * x**2 - 0.5 * hbar * omega


def _stack(h_up: TridiagonalOperator, h_down: TridiagonalOperator, grid: Grid) -> TridiagonalOperator:
    diag = np.concatenate([h_up.diag, h_down.diag])
    offdiag = np.concatenate([h_up.offdiag, [0.0], h_down.offdiag])
    return TridiagonalOperator(diag, offdiag, n_grid=2 * grid.n, h=grid.h)


def hamiltonian(model: SpinorModel, grid: Grid) -> TridiagonalOperator:
    """Block-diagonal ``diag(H_+, H_-)`` on the stacked spinor layout."""
    x = grid.x
    ops = [
        assemble_hamiltonian(grid, _channel_potential(x, model.m, w, model.hbar), model.m, model.hbar)
        for w in (model.omega_plus, model.omega_minus)
    ]
    return _stack(ops[0], ops[1], grid)


def analytic_spectrum(model: SpinorModel, nmax: int) -> list[SpinorLevel]:
    """Both ladders ``hbar n w_pm`` for n = 0..nmax, merged in ascending order."""
    if nmax < 1:
        raise ValueError("nmax must be >= 1")
    levels = [SpinorLevel(n, ch, model.hbar * n * model.omega(ch))
              for ch in ("+", "-") for n in range(nmax + 1)]
    return sorted(levels, key=lambda lv: (lv.energy, lv.channel == "-"))


def analytic_spinor_spectrum(model: SpinorModel, grid: Grid, k: int) -> Spectrum:
    """The k lowest exact levels with closed-form eigenspinors on ``grid``."""
    nmax = k
    levels = analytic_spectrum(model, nmax)[:k]
    funcs = {ch: hermite_functions(nmax, grid.x, model.m, model.omega(ch), model.hbar)
             for ch in ("+", "-")}
    vecs = np.zeros((k, 2 * grid.n))
    for i, lv in enumerate(levels):
        part = slice(0, grid.n) if lv.channel == "+" else slice(grid.n, 2 * grid.n)
        vecs[i, part] = funcs[lv.channel][lv.n]
        vecs[i] /= math.sqrt(np.dot(vecs[i], vecs[i]) * grid.h)
    energies = np.array([lv.energy for lv in levels])
    return Spectrum(energies, vecs, grid, op=hamiltonian(model, grid))


def ground_pair(model: SpinorModel, grid: Grid, atol: float = 1e-8) -> tuple[SpinorState, SpinorState]:
    """``Psi_R = (psi_+0, psi_-0)/sqrt2`` and ``Psi_L = sigma_3 Psi_R``.

    Their overlap is ``(||psi_+0||^2 - ||psi_-0||^2)/2``, zero once both
    channel Gaussians are resolved on the grid.
    """
    up = hermite_functions(0, grid.x, model.m, model.omega_plus, model.hbar)[0]
    down = hermite_functions(0, grid.x, model.m, model.omega_minus, model.hbar)[0]
    for name, f in (("+", up), ("-", down)):
        err = abs(grid.norm(f) - 1.0)
        if err > atol:
            raise ValueError(f"channel {name} ground state norm off by {err:.2e}; refine or widen the grid")
    s = 1.0 / math.sqrt(2.0)
    return SpinorState(s * up, s * down, grid.h), SpinorState(s * up, -s * down, grid.h)


def sigma3_commutator_check(model: SpinorModel, grid: Grid, coupling: float = 0.0) -> float:
    """``max ||[H, sigma_3] e_i||`` for the discretised spinor Hamiltonian.

    ``coupling`` adds ``g sigma_1`` (a transverse field), which mixes the
    channels and must show up as a nonzero commutator.
    """
    op = hamiltonian(model, grid)
    n = grid.n
    if coupling == 0.0:
        if op.offdiag[n - 1] != 0.0:
            raise AssertionError("channel blocks are coupled")
        return commutator_norm(op, sigma3(n), grid)

    def coupled(x):
        swapped = np.concatenate([x[n:], x[:n]])
        return op.matvec(x) + coupling * swapped

    return commutator_norm(coupled, sigma3(n), grid)


@dataclass(frozen=True)
class FieldForm:
    """``H = H_0 * 1 - (hbar/2) B_z(x) sigma_3`` with a static field along z.

    ``H_0`` is an oscillator of frequency ``omega0`` shifted by ``-epsilon0``
    and ``B_z = -(2/hbar)(m omega_delta_sq x^2 / 2 - epsilon_delta)``. The
    squared frequency difference is kept signed so that ``w_+ < w_-`` needs
    no imaginary root.
    """

    omega0: float
    omega_delta_sq: float
    epsilon0: float
    epsilon_delta: float
    m: float = 1.0
    hbar: float = 1.0

    def b_z(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return -(2.0 / self.hbar) * (0.5 * self.m * self.omega_delta_sq * x**2 - self.epsilon_delta)

    def channel_potential(self, x, channel: str) -> np.ndarray:
        s = 1.0 if channel == "+" else -1.0
        x = np.asarray(x, dtype=float)
        h0 = 0.5 * self.m * self.omega0**2 * x**2 - self.epsilon0
        return h0 - s * 0.5 * self.hbar * self.b_z(x)

    def channel_hamiltonians(self, grid: Grid) -> tuple[TridiagonalOperator, TridiagonalOperator]:
        return tuple(
            assemble_hamiltonian(grid, self.channel_potential(grid.x, ch), self.m, self.hbar)
            for ch in ("+", "-")
        )

    def hamiltonian(self, grid: Grid) -> TridiagonalOperator:
        up, down = self.channel_hamiltonians(grid)
        return _stack(up, down, grid)

    def to_model(self) -> SpinorModel:
        return SpinorModel(
            math.sqrt(self.omega0**2 + self.omega_delta_sq),
            math.sqrt(self.omega0**2 - self.omega_delta_sq),
            self.m,
            self.hbar,
        )

    def analytic_levels(self, nmax: int) -> list[float]:
        """Exact levels of the field form, computed from its own parameters."""
        out = []
        for s in (1.0, -1.0):
            w = math.sqrt(self.omega0**2 + s * self.omega_delta_sq)
            shift = self.epsilon0 + s * self.epsilon_delta
            out += [self.hbar * w * (n + 0.5) - shift for n in range(nmax + 1)]
        return sorted(out)


def to_field_form(model: SpinorModel) -> FieldForm:
    """Rewrite the two channels as a common oscillator in a z-field.

    The energy offsets are a quarter of the frequency sum and difference,
    so that ``epsilon0 +- epsilon_delta`` equals each channel's zero-point
    energy ``hbar w_pm / 2``.
    """
    wp, wm, hbar = model.omega_plus, model.omega_minus, model.hbar
    return FieldForm(
        omega0=math.sqrt((wp**2 + wm**2) / 2.0),
        omega_delta_sq=(wp**2 - wm**2) / 2.0,
        epsilon0=hbar * (wp + wm) / 4.0,
        epsilon_delta=hbar * (wp - wm) / 4.0,
        m=model.m,
        hbar=hbar,
    )
