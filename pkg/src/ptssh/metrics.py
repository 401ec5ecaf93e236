"""Charging-performance indicators and the parameter sweeps built on them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial
from typing import Sequence

import numpy as np

from .dynamics import ChargingTrace, asymptotic_state, evolve, trace_asymptote
from .errors import MissingAsymptote, NoDominantMode, PTSSHError, TraceTooShort
from .hamiltonian import LatticeParams
from .parallel import parallel_map
from .spectral import PTRegime, classify, is_broken

PEAK_REL_TOL = 1e-6
FLAT_TOL = 1e-10
SATURATION_LEVEL = 0.95
DEFAULT_DT = 0.01


@dataclass(frozen=True)
class ChargingMetrics:
    first_peak: float
    saturation_time: float  # math.inf when the battery never durably saturates
    monotonic: bool
    asymptote: float | None


def _first_peak(delta_e: np.ndarray) -> tuple[float, bool]:
    de = np.asarray(delta_e, dtype=float)
    if de.size < 3:
        raise TraceTooShort(f"need at least 3 samples, got {de.size}")
    if np.abs(de).max() < FLAT_TOL:
        return 0.0, False
    mid, left, right = de[1:-1], de[:-2], de[2:]
    margin = mid - np.maximum(left, right)
    peaks = np.flatnonzero(margin > PEAK_REL_TOL * np.abs(mid))
    if peaks.size:
        return float(mid[peaks[0]]), False
    return 1.0, True


def first_peak(trace: ChargingTrace) -> float:
    """Stored energy at the first strict interior local maximum.

    Monotonic traces score 1; a flat (uncharged) trace scores 0.
    """
    return _first_peak(trace.delta_e)[0]


def is_monotonic(trace: ChargingTrace) -> bool:
    return _first_peak(trace.delta_e)[1]


def saturation_time(trace: ChargingTrace, asymptote: float | None) -> float:
    """Earliest grid time after which ``delta_e`` stays at or above 95% of ``asymptote``.

    Returns ``math.inf`` for unbroken (oscillatory) parameters or when the
    level is not held through the end of the trace.
    """
    if not is_broken(trace.params):
        return math.inf
    if asymptote is None or not math.isfinite(asymptote):
        raise MissingAsymptote("a finite asymptote is required in a broken regime")
    above = trace.delta_e >= SATURATION_LEVEL * asymptote
    if not above[-1]:
        return math.inf
    below = np.flatnonzero(~above)
    first = 0 if below.size == 0 else int(below[-1]) + 1
    return float(trace.times[first])


def charging_metrics(trace: ChargingTrace) -> ChargingMetrics:
    value, mono = _first_peak(trace.delta_e)
    try:
        asym = trace_asymptote(trace)
    except NoDominantMode:
        asym = None
    t95 = saturation_time(trace, asym) if asym is not None else math.inf
    return ChargingMetrics(first_peak=value, saturation_time=t95, monotonic=mono, asymptote=asym)


def default_t_max(p: LatticeParams) -> float:
    """200/J2 below the bulk thresholds, 100/J2 once bulk modes break."""
    regime = classify(p).pt_regime
    return 200.0 if regime in (PTRegime.UNBROKEN, PTRegime.EDGE_BROKEN) else 100.0


def run_metrics(p: LatticeParams, t_max: float | None = None, dt: float = DEFAULT_DT) -> ChargingMetrics:
    trace = evolve(p, default_t_max(p) if t_max is None else t_max, dt)
    return charging_metrics(trace)


def log10_time(t: float) -> float:
    """``log10(t)``, keeping ``inf`` for never-saturating cells and ``-inf`` for t = 0."""
    if t == math.inf:
        return math.inf
    return math.log10(t) if t > 0 else -math.inf


@dataclass(frozen=True)
class MetricMap:
    """Metric grids; ``[i, j]`` belongs to ``j1_grid[i]`` and ``gamma_grid[j]``.

    Saturation never reached is stored as ``inf``; a failed cell holds NaN
    and its error message is kept in ``errors``.
    """

    j1_grid: np.ndarray
    gamma_grid: np.ndarray
    first_peak_grid: np.ndarray
    log10_t95_grid: np.ndarray
    errors: dict[tuple[int, int], str] = field(default_factory=dict)


def _metric_cell(cell: tuple[float, float], p_base: LatticeParams, t_max, dt) -> tuple[float, float, str | None]:
    j1, gamma = cell
    try:
        m = run_metrics(p_base.with_(J1=j1, gamma=gamma), t_max, dt)
    except PTSSHError as exc:
        return math.nan, math.nan, f"{type(exc).__name__}: {exc}"
    return m.first_peak, log10_time(m.saturation_time), None


def sweep_metrics(
    j1_grid: Sequence[float],
    gamma_grid: Sequence[float],
    p_base: LatticeParams,
    t_max: float | None = None,
    dt: float = DEFAULT_DT,
    workers: int | None = None,
) -> MetricMap:
    j1s = np.asarray(j1_grid, dtype=float)
    gs = np.asarray(gamma_grid, dtype=float)
    cells = [(float(a), float(b)) for a in j1s for b in gs]
    out = parallel_map(partial(_metric_cell, p_base=p_base, t_max=t_max, dt=dt), cells, workers)
    fp = np.array([o[0] for o in out]).reshape(j1s.size, gs.size)
    lt = np.array([o[1] for o in out]).reshape(j1s.size, gs.size)
    errors = {divmod(k, gs.size): o[2] for k, o in enumerate(out) if o[2] is not None}
    return MetricMap(j1s, gs, fp, lt, errors)


@dataclass(frozen=True)
class ScalingRow:
    n: int
    gamma: float
    phase: str  # "topological" or "trivial"
    first_peak: float
    saturation_time: float

    @property
    def log10_t95(self) -> float:
        return log10_time(self.saturation_time)


def _scaling_cell(cell: tuple[int, float, str, float], p_base: LatticeParams, t_max, dt) -> ScalingRow:
    n, gamma, phase, j1 = cell
    m = run_metrics(p_base.with_(N=n, J1=j1, gamma=gamma), t_max, dt)
    return ScalingRow(n, gamma, phase, m.first_peak, m.saturation_time)


def size_scaling(
    n_list: Sequence[int],
    gamma_list: Sequence[float],
    j1_topo: float = 0.5,
    j1_triv: float = 1.5,
    p_base: LatticeParams | None = None,
    t_max: float | None = None,
    dt: float = DEFAULT_DT,
    workers: int | None = None,
) -> list[ScalingRow]:
    """Metrics per (N, gamma, phase), ordered by N, then gamma, topological first."""
    base = p_base or LatticeParams(N=int(n_list[0]), J1=j1_topo)
    cells = [
        (int(n), float(g), phase, j1)
        for n in n_list
        for g in gamma_list
        for phase, j1 in (("topological", j1_topo), ("trivial", j1_triv))
    ]
    return parallel_map(partial(_scaling_cell, p_base=base, t_max=t_max, dt=dt), cells, workers)


def scaling_curves(rows: Sequence[ScalingRow]) -> dict[tuple[float, str], list[ScalingRow]]:
    curves: dict[tuple[float, str], list[ScalingRow]] = {}
    for row in rows:
        curves.setdefault((row.gamma, row.phase), []).append(row)
    return curves


def relaxation_estimate(H_pt) -> float:
    """Relaxation time ``1 / (lambda_max - lambda_2)`` toward the dominant mode."""
    mode = asymptotic_state(H_pt)
    if mode.degenerate_top:
        raise NoDominantMode(f"top growth rates degenerate (gap {mode.delta_lambda:.3e})")
    return 1.0 / mode.delta_lambda
