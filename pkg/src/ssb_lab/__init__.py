"""Numerical laboratory for spontaneous symmetry breaking in 1D quantum mechanics."""

__version__ = "0.1.0"

from .eigen import Spectrum, cluster_degeneracies, eigensolve  # noqa: E402
from .lattice import Grid, TridiagonalOperator, assemble_hamiltonian, build_grid  # noqa: E402
from .symmetry import SSBVerdict, detect_ssb, parity, sigma3  # noqa: E402

__all__ = [
    "__version__",
    "Grid",
    "SSBVerdict",
    "Spectrum",
    "TridiagonalOperator",
    "assemble_hamiltonian",
    "build_grid",
    "cluster_degeneracies",
    "detect_ssb",
    "eigensolve",
    "parity",
    "sigma3",
]
