"""Charging dynamics of the battery under the gain/loss charger.

The state starts in the ground state of ``H_SSH`` and is propagated under
the physical ``H_PT`` with renormalization; energies are measured with the
battery Hamiltonian rescaled to the interval [-1, 1].

Note on the ground-state initial condition: ``Gamma`` maps the lowest
eigenstate of ``H_SSH`` onto the highest one, so ``span(phi_1, phi_2N)`` is
invariant under ``H_PT``. In exact arithmetic the state never leaves that
plane. Modes outside it (edge or band-centre modes with larger growth
rates) are populated only through floating-point rounding at the 1e-16
level and then amplified, so their takeover time carries an offset of
order ``log(1e16) / (growth-rate gap)``. The propagation lattice is fixed
(see ``matrixcore.Propagator``) so this seed, and every trace, is
reproducible and independent of the output sampling step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGround, InvalidState, NoDominantMode
from .hamiltonian import LatticeParams, build_pt, build_ssh, normalize_battery
from .matrixcore import EigenSystem, Propagator, as_cmatrix, eig_general, eig_hermitian

GROUND_GAP_TOL = 1e-10
DOMINANT_TOL = 1e-9
DEGENERATE_TOP_TOL = 1e-9
EIGENVECTOR_GAP_TOL = 1e-6


@dataclass(frozen=True)
class ChargingTrace:
    """Sampled charging run.

    ``states[i]`` is the normalized state at ``times[i]``; ``populations[i, j]``
    is ``|<phi_j|psi>|^2`` against the ascending eigenbasis ``basis`` of
    ``H_SSH``; ``delta_e`` is measured with ``h_norm``.
    """

    params: LatticeParams
    times: np.ndarray
    states: np.ndarray
    delta_e: np.ndarray
    populations: np.ndarray
    h_norm: np.ndarray
    basis: np.ndarray
    energies: np.ndarray

    def __len__(self) -> int:
        return self.times.size

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if self.times.size > 1 else 0.0


@dataclass(frozen=True)
class PassiveDecomposition:
    occupations_desc: np.ndarray
    energies_asc: np.ndarray

    @property
    def passive_energy(self) -> float:
        return float(np.dot(self.occupations_desc, self.energies_asc))


@dataclass(frozen=True)
class AsymptoticMode:
    """Right eigenvector with the largest growth rate and the gap to the runner-up."""

    vector: np.ndarray
    lambda_max: float
    delta_lambda: float
    eigensystem: EigenSystem

    @property
    def degenerate_top(self) -> bool:
        return self.delta_lambda < DEGENERATE_TOP_TOL


def _ground_index_check(es: EigenSystem) -> None:
    w = es.eigenvalues.real
    if w.size > 1 and w[1] - w[0] < GROUND_GAP_TOL:
        raise DegenerateGround(f"two lowest levels differ by {w[1] - w[0]:.3e}")


def ground_state(H_ssh) -> np.ndarray:
    """Unit-norm lowest eigenvector (largest component real positive)."""
    es = eig_hermitian(H_ssh)
    _ground_index_check(es)
    return es.vectors[:, 0].copy()


def expectation(H: np.ndarray, states: np.ndarray) -> np.ndarray:
    """``<psi|H|psi>`` (real part) for one state or a stack of row states."""
    s = np.atleast_2d(states)
    vals = np.einsum("ti,ij,tj->t", s.conj(), H, s).real
    return vals if np.ndim(states) == 2 else vals[0]


def time_grid(t_max: float, dt: float) -> np.ndarray:
    if not (t_max > 0 and dt > 0 and dt <= t_max):
        raise ValueError(f"need 0 < dt <= t_max, got dt={dt!r}, t_max={t_max!r}")
    n = int(np.floor(t_max / dt + 1e-9))
    return dt * np.arange(n + 1)


def evolve(p: LatticeParams, t_max: float, dt: float, step: float | None = None) -> ChargingTrace:
    """Charge from the ground state and sample every ``dt`` up to ``t_max``."""
    h_ssh = build_ssh(p)
    es = eig_hermitian(h_ssh)
    _ground_index_check(es)
    psi0 = es.vectors[:, 0]
    h_norm = normalize_battery(h_ssh)
    times = time_grid(t_max, dt)
    states, _ = Propagator(build_pt(p), step).run(psi0, times)
    energy = expectation(h_norm, states)
    delta_e = energy - energy[0]
    populations = np.abs(states @ es.vectors.conj()) ** 2
    return ChargingTrace(
        params=p,
        times=times,
        states=states,
        delta_e=delta_e,
        populations=populations,
        h_norm=h_norm,
        basis=es.vectors,
        energies=es.eigenvalues.real,
    )


def passive_decomposition(rho, H_norm) -> PassiveDecomposition:
    """Validate ``rho`` and pair its occupations (descending) with energies (ascending)."""
    R = as_cmatrix(rho)
    H = as_cmatrix(H_norm)
    if R.shape != H.shape:
        raise InvalidState(f"state shape {R.shape} does not match operator {H.shape}")
    if np.abs(R - R.conj().T).max() > 1e-10:
        raise InvalidState("density operator is not Hermitian")
    tr = np.trace(R)
    if abs(tr - 1.0) > 1e-10:
        raise InvalidState(f"trace {tr:.12g} differs from 1")
    r = np.linalg.eigvalsh(R)
    if r[0] < -1e-10:
        raise InvalidState(f"negative occupation {r[0]:.3e}")
    r = np.clip(r, 0.0, 1.0)[::-1]
    eps = np.linalg.eigvalsh(H)
    return PassiveDecomposition(occupations_desc=r, energies_asc=eps)


def ergotropy(rho, H_norm) -> float:
    """Maximal unitary work: energy of ``rho`` minus that of its passive rearrangement."""
    dec = passive_decomposition(rho, H_norm)
    energy = float(np.trace(as_cmatrix(H_norm) @ as_cmatrix(rho)).real)
    return energy - dec.passive_energy


def asymptotic_state(H_pt) -> AsymptoticMode:
    es = eig_general(H_pt)
    lam = es.eigenvalues.imag
    order = np.argsort(lam, kind="stable")
    top = int(order[-1])
    lam_max = float(lam[top])
    if lam_max <= DOMINANT_TOL:
        raise NoDominantMode(f"largest growth rate {lam_max:.3e}; spectrum is real")
    gap = float(lam_max - lam[order[-2]]) if lam.size > 1 else float("inf")
    return AsymptoticMode(
        vector=es.vectors[:, top].copy(), lambda_max=lam_max, delta_lambda=gap, eigensystem=es
    )


def asymptotic_delta_e(
    H_pt, H_norm, psi0, *, long_time: float = 500.0, long_dt: float = 0.05
) -> float:
    """Long-time stored energy.

    Uses the dominant eigenvector when its growth-rate gap exceeds 1e-6;
    otherwise averages ``delta_e`` over the last 10% of a run to ``long_time``.
    """
    mode = asymptotic_state(H_pt)
    Hn = as_cmatrix(H_norm)
    e0 = float(expectation(Hn, np.asarray(psi0, dtype=np.complex128)))
    if mode.delta_lambda > EIGENVECTOR_GAP_TOL:
        return float(expectation(Hn, mode.vector)) - e0
    times = time_grid(long_time, long_dt)
    states, _ = Propagator(H_pt).run(psi0, times)
    tail = states[int(0.9 * times.size):]
    return float(expectation(Hn, tail).mean()) - e0


def trace_asymptote(trace: ChargingTrace) -> float:
    """``asymptotic_delta_e`` for the parameters and initial state of ``trace``."""
    return asymptotic_delta_e(build_pt(trace.params), trace.h_norm, trace.states[0])
