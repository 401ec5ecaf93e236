"""Gain/loss (PT-symmetric) SSH chain as a quantum battery.

Spectra and exceptional points, normalized non-Hermitian charging dynamics,
charging metrics and identity checks for a dimerized tight-binding chain.
"""

from .dynamics import ChargingTrace, asymptotic_state, ergotropy, evolve, ground_state
from .errors import PTSSHError
from .hamiltonian import Boundary, LatticeParams, build_gamma, build_pt, build_ssh, normalize_battery
from .matrixcore import eig_general, eig_hermitian, expm, propagate_normalized, propagate_with_log_norm
from .metrics import ChargingMetrics, charging_metrics, run_metrics, size_scaling, sweep_metrics
from .spectral import (
    PhaseLabel,
    PTRegime,
    Topology,
    classify,
    detect_breaking_threshold,
    edge_ep_exact,
    edge_ep_threshold,
    phase_diagram,
    sweep_spectrum,
)
from .verify import run_suite

__version__ = "0.1.0"

__all__ = [
    "Boundary", "ChargingMetrics", "ChargingTrace", "LatticeParams", "PTRegime", "PTSSHError",
    "PhaseLabel", "Topology", "asymptotic_state", "build_gamma", "build_pt", "build_ssh",
    "charging_metrics", "classify", "detect_breaking_threshold", "edge_ep_exact", "edge_ep_threshold",
    "eig_general", "eig_hermitian", "ergotropy", "evolve", "expm", "ground_state", "normalize_battery",
    "phase_diagram", "propagate_normalized", "propagate_with_log_norm", "run_metrics", "run_suite",
    "size_scaling", "sweep_metrics", "sweep_spectrum",
]
