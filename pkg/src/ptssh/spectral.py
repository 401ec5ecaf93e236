"""Exceptional-point thresholds, regime classification and spectral sweeps."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import partial

import numpy as np

from .errors import BoundaryMismatch, BracketFailure, NoConvergence
from .hamiltonian import Boundary, LatticeParams, build_pt, build_ssh
from .matrixcore import eig_general, eig_hermitian
from .parallel import parallel_map

IMAG_TOL = 1e-9
CRITICAL_TOL = 1e-12


class Topology(str, Enum):
    TRIVIAL = "Trivial"
    TOPOLOGICAL = "Topological"
    CRITICAL = "Critical"


class PTRegime(str, Enum):
    UNBROKEN = "Unbroken"
    EDGE_BROKEN = "Edge-broken"
    PARTIALLY_BROKEN = "Partially broken"
    FULLY_BROKEN = "Fully broken"

    @property
    def rank(self) -> int:
        return list(PTRegime).index(self)


@dataclass(frozen=True)
class PhaseLabel:
    topology: Topology
    pt_regime: PTRegime

    def __post_init__(self):
        if self.pt_regime is PTRegime.EDGE_BROKEN and self.topology is not Topology.TOPOLOGICAL:
            raise ValueError("edge-broken regime requires the topological phase")

    def __str__(self) -> str:
        return f"{self.topology.value}/{self.pt_regime.value}"


def _require_open(p: LatticeParams) -> None:
    if p.boundary is not Boundary.OPEN:
        raise BoundaryMismatch("edge physics is defined for open chains only")


def edge_ep_threshold(p: LatticeParams) -> float | None:
    """Closed-form edge-doublet EP for the open chain; ``None`` when ``J1 >= J2``.

    This is the leading-order estimate of the hybridized edge-pair energy;
    ``edge_ep_exact`` gives the exact value.
    """
    _require_open(p)
    if p.J1 >= p.J2:
        return None
    r = p.J1 / p.J2
    return p.J1 * (1 - r**2) / (1 - r ** (2 * p.N)) * r ** (p.N - 1)


def edge_ep_exact(p: LatticeParams) -> float | None:
    """Smallest ``|E|`` of the Hermitian open chain, where the edge pair coalesces.

    Because ``Gamma`` anticommutes with ``H_SSH``, ``H_PT^2 = H_SSH^2 - gamma^2``
    and each ``+-E`` pair of the Hermitian chain turns complex exactly at
    ``gamma = |E|``.
    """
    _require_open(p)
    if p.J1 >= p.J2:
        return None
    w = eig_hermitian(build_ssh(p)).eigenvalues.real
    return float(np.abs(w).min())


def bulk_ep_thresholds(p: LatticeParams) -> tuple[float, float]:
    return abs(p.J1 - p.J2), p.J1 + p.J2


def topology_of(p: LatticeParams) -> Topology:
    if abs(p.J1 - p.J2) < CRITICAL_TOL:
        return Topology.CRITICAL
    return Topology.TOPOLOGICAL if p.J1 < p.J2 else Topology.TRIVIAL


def classify(p: LatticeParams) -> PhaseLabel:
    """Topological phase and PT regime of an open chain.

    A ``gamma`` sitting exactly on a threshold is assigned to the more
    broken regime. ``gamma = 0`` is always unbroken (Hermitian).
    """
    _require_open(p)
    topo = topology_of(p)
    lower, upper = bulk_ep_thresholds(p)
    g = p.gamma
    if g == 0.0:
        regime = PTRegime.UNBROKEN
    elif g >= upper:
        regime = PTRegime.FULLY_BROKEN
    elif g >= lower:
        regime = PTRegime.PARTIALLY_BROKEN
    elif topo is Topology.TOPOLOGICAL and g >= edge_ep_threshold(p):
        regime = PTRegime.EDGE_BROKEN
    else:
        regime = PTRegime.UNBROKEN
    return PhaseLabel(topo, regime)


def max_imag(p: LatticeParams) -> float:
    return float(np.abs(eig_general(build_pt(p)).eigenvalues.imag).max())


def is_broken(p: LatticeParams, imag_tol: float = IMAG_TOL) -> bool:
    return max_imag(p) > imag_tol


@dataclass(frozen=True)
class SpectralSweep:
    """Eigenvalues of ``H_PT`` along a gain/loss grid.

    ``eigenvalues[i]`` holds the sorted spectrum at ``gamma_grid[i]``;
    ``ep_flags[i]`` marks a near-defective eigenvector matrix.
    """

    params: LatticeParams
    gamma_grid: np.ndarray
    eigenvalues: np.ndarray
    ep_flags: np.ndarray

    def n_complex(self, imag_tol: float = IMAG_TOL) -> np.ndarray:
        return (np.abs(self.eigenvalues.imag) > imag_tol).sum(axis=1)


def _check_grid(grid, name: str) -> np.ndarray:
    g = np.asarray(grid, dtype=float)
    if g.ndim != 1 or g.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-D grid")
    if np.any(np.diff(g) <= 0):
        raise ValueError(f"{name} must be strictly increasing")
    return g


def _spectrum_cell(gamma: float, p: LatticeParams) -> tuple[np.ndarray, bool]:
    try:
        es = eig_general(build_pt(p.with_(gamma=gamma)))
    except NoConvergence as exc:
        raise NoConvergence(f"gamma = {gamma!r}: {exc}") from exc
    return es.eigenvalues, es.near_defective


def sweep_spectrum(p: LatticeParams, gamma_grid, workers: int | None = None) -> SpectralSweep:
    grid = _check_grid(gamma_grid, "gamma_grid")
    cells = parallel_map(partial(_spectrum_cell, p=p), grid.tolist(), workers)
    return SpectralSweep(
        params=p,
        gamma_grid=grid,
        eigenvalues=np.array([c[0] for c in cells]),
        ep_flags=np.array([c[1] for c in cells], dtype=bool),
    )


def detect_breaking_threshold(
    p: LatticeParams, tol: float = 1e-6, imag_tol: float = IMAG_TOL
) -> float:
    """Smallest ``gamma`` with a complex eigenvalue, by bisection to ``tol``.

    Works for either boundary; the search bracket is ``[0, J1 + J2 + 1]``.
    """
    lo, hi = 0.0, p.J1 + p.J2 + 1.0
    if is_broken(p.with_(gamma=lo), imag_tol) or not is_broken(p.with_(gamma=hi), imag_tol):
        raise BracketFailure(f"no real-to-complex transition in [{lo}, {hi}]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if is_broken(p.with_(gamma=mid), imag_tol):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def first_breaking_on_grid(p: LatticeParams, gamma_grid, imag_tol: float = IMAG_TOL) -> float | None:
    """First grid value of ``gamma`` at which the spectrum has left the real axis."""
    grid = _check_grid(gamma_grid, "gamma_grid")
    for g in grid:
        if is_broken(p.with_(gamma=float(g)), imag_tol):
            return float(g)
    return None


@dataclass(frozen=True)
class PhaseDiagram:
    """Labels on a (J1, gamma) grid plus the threshold curves versus J1.

    ``labels[i][j]`` belongs to ``j1_grid[i]`` and ``gamma_grid[j]``;
    ``gamma_e`` is NaN where no edge EP exists.
    """

    j1_grid: np.ndarray
    gamma_grid: np.ndarray
    labels: list[list[PhaseLabel]]
    gamma_e: np.ndarray
    bulk_lower: np.ndarray
    bulk_upper: np.ndarray

    def regions(self, topology: Topology) -> set[PTRegime]:
        return {lab.pt_regime for row in self.labels for lab in row if lab.topology is topology}


def _phase_row(j1: float, gamma_grid: np.ndarray, p_base: LatticeParams) -> list[PhaseLabel]:
    p = p_base.with_(J1=j1)
    return [classify(p.with_(gamma=float(g))) for g in gamma_grid]


def phase_diagram(j1_grid, gamma_grid, p_base: LatticeParams, workers: int | None = None) -> PhaseDiagram:
    j1s = _check_grid(j1_grid, "j1_grid")
    gs = _check_grid(gamma_grid, "gamma_grid")
    _require_open(p_base)
    labels = parallel_map(partial(_phase_row, gamma_grid=gs, p_base=p_base), j1s.tolist(), workers)
    gamma_e = []
    for j1 in j1s:
        ge = edge_ep_threshold(p_base.with_(J1=float(j1)))
        gamma_e.append(math.nan if ge is None else ge)
    return PhaseDiagram(
        j1_grid=j1s,
        gamma_grid=gs,
        labels=labels,
        gamma_e=np.array(gamma_e),
        bulk_lower=np.abs(j1s - p_base.J2),
        bulk_upper=j1s + p_base.J2,
    )
