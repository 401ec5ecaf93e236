"""Lattice operators in the single-excitation site basis.

Sites are interleaved ``A_1, B_1, A_2, B_2, ...``: site ``A_n`` (cells
counted from 1) sits at index ``2(n-1)`` and ``B_n`` at ``2(n-1) + 1``.
Energies are in units of ``J2`` unless stated otherwise.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .errors import DegenerateSpectrum
from .matrixcore import as_cmatrix, eig_hermitian


class Boundary(str, Enum):
    OPEN = "open"
    PERIODIC = "periodic"


@dataclass(frozen=True)
class LatticeParams:
    """Physical configuration of the chain.

    Attributes
    ----------
    N : int
        Number of unit cells (``2N`` sites), at least 2.
    J1, J2 : float
        Intra- and inter-cell hopping; ``J2`` is the energy unit.
    gamma : float
        Gain (A sites) and loss (B sites) strength.
    boundary : Boundary
    """

    N: int
    J1: float
    J2: float = 1.0
    gamma: float = 0.0
    boundary: Boundary = Boundary.OPEN

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise ValueError(f"N must be an integer >= 2, got {self.N!r}")
        if not (math.isfinite(self.J1) and self.J1 >= 0):
            raise ValueError(f"J1 must be finite and >= 0, got {self.J1!r}")
        if not (math.isfinite(self.J2) and self.J2 > 0):
            raise ValueError(f"J2 must be finite and > 0, got {self.J2!r}")
        if not (math.isfinite(self.gamma) and self.gamma >= 0):
            raise ValueError(f"gamma must be finite and >= 0, got {self.gamma!r}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "boundary", Boundary(self.boundary))

    @property
    def dim(self) -> int:
        return 2 * self.N

    @property
    def is_topological(self) -> bool:
        return self.J1 < self.J2

    def with_(self, **changes) -> "LatticeParams":
        return replace(self, **changes)


def site_index(n: int, sublattice: str, N: int) -> int:
    """Matrix index of site ``A_n`` or ``B_n`` (``1 <= n <= N``)."""
    if not 1 <= n <= N:
        raise ValueError(f"cell {n} outside 1..{N}")
    if sublattice not in ("A", "B"):
        raise ValueError(f"sublattice must be 'A' or 'B', got {sublattice!r}")
    return 2 * (n - 1) + (sublattice == "B")


def build_ssh(p: LatticeParams) -> np.ndarray:
    """Hermitian SSH hopping matrix."""
    H = np.zeros((p.dim, p.dim), dtype=np.complex128)
    for n in range(p.N):
        a, b = 2 * n, 2 * n + 1
        H[a, b] = H[b, a] = p.J1
        if n + 1 < p.N:
            H[b, b + 1] = H[b + 1, b] = p.J2
    if p.boundary is Boundary.PERIODIC:
        last_b = p.dim - 1
        H[last_b, 0] += p.J2
        H[0, last_b] += p.J2
    return H


def build_gamma(p: LatticeParams) -> np.ndarray:
    """Sublattice operator: +1 on A sites, -1 on B sites."""
    return np.diag(np.tile([1.0, -1.0], p.N)).astype(np.complex128)


def build_pt(p: LatticeParams) -> np.ndarray:
    """SSH hopping plus balanced gain/loss ``i*gamma*Gamma``."""
    return build_ssh(p) + 1j * p.gamma * build_gamma(p)


def bloch(p: LatticeParams, k: float) -> np.ndarray:
    """2x2 Bloch matrix, with ``+i gamma`` / ``-i gamma`` on the diagonal."""
    if not -math.pi <= k <= math.pi:
        raise ValueError(f"k = {k!r} outside [-pi, pi]")
    off = p.J1 + p.J2 * cmath.exp(-1j * k)
    return np.array(
        [[1j * p.gamma, off], [off.conjugate(), -1j * p.gamma]], dtype=np.complex128
    )


def dispersion_hermitian(p: LatticeParams, k: float) -> tuple[float, float]:
    e = math.sqrt(max(0.0, p.J1**2 + p.J2**2 + 2 * p.J1 * p.J2 * math.cos(k)))
    return -e, e


def dispersion_pt(p: LatticeParams, k: float) -> tuple[complex, complex]:
    """Bulk bands with gain/loss; purely imaginary once the radicand is negative."""
    radicand = p.J1**2 + p.J2**2 + 2 * p.J1 * p.J2 * math.cos(k) - p.gamma**2
    e = complex(math.sqrt(radicand)) if radicand >= 0 else 1j * math.sqrt(-radicand)
    return -e, e


def normalize_battery(H) -> np.ndarray:
    """Affinely map a Hermitian operator so its spectrum spans exactly [-1, 1]."""
    A = as_cmatrix(H)
    w = eig_hermitian(A).eigenvalues.real
    e_min, e_max = float(w[0]), float(w[-1])
    width = e_max - e_min
    if width < 1e-12:
        raise DegenerateSpectrum(f"spectral width {width:.3e}")
    return (2.0 * A - (e_max + e_min) * np.eye(A.shape[0])) / width
