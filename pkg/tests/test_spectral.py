import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ptssh.errors import BoundaryMismatch, BracketFailure
from ptssh.hamiltonian import Boundary, LatticeParams, build_pt, build_ssh
from ptssh.matrixcore import eig_general, eig_hermitian
from ptssh.spectral import (
    PhaseLabel,
    PTRegime,
    Topology,
    bulk_ep_thresholds,
    classify,
    detect_breaking_threshold,
    edge_ep_exact,
    edge_ep_threshold,
    first_breaking_on_grid,
    is_broken,
    phase_diagram,
    sweep_spectrum,
    topology_of,
)

from conftest import match_multiset


def test_edge_threshold_closed_form_value():
    assert edge_ep_threshold(LatticeParams(N=6, J1=0.5)) == pytest.approx(0.011721, abs=1e-6)
    assert edge_ep_threshold(LatticeParams(N=6, J1=1.5)) is None
    assert edge_ep_threshold(LatticeParams(N=6, J1=0.0)) == 0.0


def test_edge_threshold_geometric_decay():
    ratio = [
        edge_ep_threshold(LatticeParams(N=n + 1, J1=0.5)) / edge_ep_threshold(LatticeParams(N=n, J1=0.5))
        for n in (10, 20, 30)
    ]
    assert ratio[-1] == pytest.approx(0.5, abs=1e-6)
    assert abs(ratio[-1] - 0.5) <= abs(ratio[0] - 0.5)


def test_edge_threshold_needs_open_chain():
    p = LatticeParams(N=6, J1=0.5, boundary=Boundary.PERIODIC)
    with pytest.raises(BoundaryMismatch):
        edge_ep_threshold(p)
    with pytest.raises(BoundaryMismatch):
        classify(p)


def test_bulk_thresholds():
    assert bulk_ep_thresholds(LatticeParams(N=6, J1=0.5)) == (0.5, 1.5)
    assert bulk_ep_thresholds(LatticeParams(N=6, J1=1.0)) == (0.0, 2.0)
    assert bulk_ep_thresholds(LatticeParams(N=6, J1=0.0)) == (1.0, 1.0)


def test_classify_examples():
    assert classify(LatticeParams(N=6, J1=0.5, gamma=0.45)) == PhaseLabel(Topology.TOPOLOGICAL, PTRegime.EDGE_BROKEN)
    assert classify(LatticeParams(N=6, J1=1.5, gamma=0.45)) == PhaseLabel(Topology.TRIVIAL, PTRegime.UNBROKEN)
    assert classify(LatticeParams(N=6, J1=0.5, gamma=2.8)) == PhaseLabel(Topology.TOPOLOGICAL, PTRegime.FULLY_BROKEN)
    assert classify(LatticeParams(N=6, J1=1.0, gamma=0.3)).topology is Topology.CRITICAL
    assert str(classify(LatticeParams(N=6, J1=1.5, gamma=1.0))) == "Trivial/Partially broken"


def test_threshold_ties_go_to_more_broken_regime():
    assert classify(LatticeParams(N=6, J1=0.5, gamma=0.5)).pt_regime is PTRegime.PARTIALLY_BROKEN
    assert classify(LatticeParams(N=6, J1=0.5, gamma=1.5)).pt_regime is PTRegime.FULLY_BROKEN
    assert classify(LatticeParams(N=6, J1=0.0, gamma=0.0)).pt_regime is PTRegime.UNBROKEN


def test_edge_broken_requires_topological():
    with pytest.raises(ValueError):
        PhaseLabel(Topology.TRIVIAL, PTRegime.EDGE_BROKEN)


def test_regime_strings():
    assert [r.value for r in PTRegime] == ["Unbroken", "Edge-broken", "Partially broken", "Fully broken"]


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 10), st.floats(0.0, 2.0), st.lists(st.floats(0.0, 4.0), min_size=2, max_size=6))
def test_regime_is_monotone_in_gamma(N, J1, gammas):
    ranks = [classify(LatticeParams(N=N, J1=J1, gamma=g)).pt_regime.rank for g in sorted(gammas)]
    assert ranks == sorted(ranks)


def test_breaking_threshold_matches_closed_form():
    p6 = LatticeParams(N=6, J1=0.5)
    g6 = detect_breaking_threshold(p6)
    assert abs(g6 - edge_ep_threshold(p6)) < 1e-4
    assert detect_breaking_threshold(LatticeParams(N=10, J1=0.5)) < g6


def test_trivial_open_chain_breaks_at_bulk_gap():
    # Stays red: the open trivial chain first breaks at its smallest |E|
    # (0.6715 for N=6), not at the infinite-chain gap |J1 - J2| = 0.5.
    assert abs(detect_breaking_threshold(LatticeParams(N=6, J1=1.5)) - 0.5) < 1e-3


def test_trivial_periodic_chain_breaks_at_bulk_gap():
    p = LatticeParams(N=6, J1=1.5, boundary=Boundary.PERIODIC)
    assert abs(detect_breaking_threshold(p) - 0.5) < 1e-3


def test_open_chain_breaks_at_smallest_energy():
    for j1 in (0.5, 1.5):
        p = LatticeParams(N=6, J1=j1)
        exact = float(np.abs(eig_hermitian(build_ssh(p)).eigenvalues.real).min())
        assert abs(detect_breaking_threshold(p, tol=1e-9) - exact) < 1e-6


@pytest.mark.parametrize("N", [4, 6, 8, 10])
@pytest.mark.parametrize("J1", [0.3, 0.5, 0.7])
def test_exact_edge_threshold_matches_bisection(N, J1):
    p = LatticeParams(N=N, J1=J1)
    assert abs(detect_breaking_threshold(p, tol=1e-9) - edge_ep_exact(p)) < 1e-6


def test_bracket_failure():
    with pytest.raises(BracketFailure):
        detect_breaking_threshold(LatticeParams(N=4, J1=0.5), imag_tol=100.0)


@pytest.mark.parametrize("J1", [0.3, 0.6, 1.4, 1.8])
def test_periodic_first_breaking_is_bulk_gap(J1):
    p = LatticeParams(N=6, J1=J1, boundary=Boundary.PERIODIC)
    grid = np.round(np.arange(0, 3001) * 1e-3, 12)
    g = first_breaking_on_grid(p, grid)
    assert abs(g - abs(J1 - 1.0)) <= 1e-3 + 1e-12


def test_sweep_conjugate_symmetry_and_counts():
    p = LatticeParams(N=6, J1=0.5)
    grid = np.linspace(0, 3, 61)
    sw = sweep_spectrum(p, grid)
    assert sw.eigenvalues.shape == (61, 12)
    for ev in sw.eigenvalues:
        assert match_multiset(ev, ev.conj()) < 1e-9
    n = sw.n_complex()
    assert n[0] == 0 and n[-1] == 12
    assert list(n) == sorted(n)


def test_sweep_examples():
    p = LatticeParams(N=6, J1=0.5)
    ge = edge_ep_threshold(p)
    below = sweep_spectrum(p, np.linspace(0, 0.98 * ge, 20))
    assert np.abs(below.eigenvalues.imag).max() <= 1e-9
    mid = sweep_spectrum(p, np.linspace(ge + 0.01, 0.49, 20))
    assert np.all((np.abs(mid.eigenvalues.imag) > 1e-6).sum(axis=1) == 2)
    top = sweep_spectrum(p, [2.8])
    assert np.all(np.abs(top.eigenvalues.imag) > 0)


def test_sweep_flags_exceptional_point():
    p = LatticeParams(N=2, J1=0.0)
    sw = sweep_spectrum(p, [0.5, 1.0, 1.5])
    assert sw.ep_flags.tolist() == [False, True, False]


def test_sweep_parallel_matches_serial():
    p = LatticeParams(N=4, J1=0.7)
    grid = np.linspace(0, 2, 9)
    assert np.array_equal(sweep_spectrum(p, grid, 1).eigenvalues, sweep_spectrum(p, grid, 2).eigenvalues)


def test_grid_validation():
    with pytest.raises(ValueError):
        sweep_spectrum(LatticeParams(N=4, J1=0.5), [0.0, 0.0])
    with pytest.raises(ValueError):
        phase_diagram([1.0, 0.5], [0.0, 1.0], LatticeParams(N=4, J1=0.5))


def test_phase_diagram_regions_and_curves():
    pd = phase_diagram(np.linspace(0, 2, 21), np.linspace(0, 3, 31), LatticeParams(N=6, J1=0.5))
    assert pd.regions(Topology.TOPOLOGICAL) == set(PTRegime)
    assert pd.regions(Topology.TRIVIAL) == {PTRegime.UNBROKEN, PTRegime.PARTIALLY_BROKEN, PTRegime.FULLY_BROKEN}
    assert pd.gamma_e[0] == 0.0
    assert math.isnan(pd.gamma_e[-1])
    assert np.allclose(pd.bulk_lower, np.abs(pd.j1_grid - 1))
    assert np.allclose(pd.bulk_upper, pd.j1_grid + 1)


def test_labels_agree_with_spectrum():
    for j1 in (0.3, 0.5, 1.5):
        for g in (0.005, 0.05, 0.3, 0.9, 1.7, 2.8):
            p = LatticeParams(N=6, J1=j1, gamma=g)
            regime = classify(p).pt_regime
            n = int((np.abs(eig_general(build_pt(p)).eigenvalues.imag) > 1e-9).sum())
            if regime is PTRegime.UNBROKEN:
                assert n == 0
            elif regime is PTRegime.EDGE_BROKEN:
                assert n == 2
            elif regime is PTRegime.FULLY_BROKEN:
                assert n == 12
            assert is_broken(p) == (n > 0)


def test_topology():
    assert topology_of(LatticeParams(N=3, J1=0.2)) is Topology.TOPOLOGICAL
    assert topology_of(LatticeParams(N=3, J1=1.0 + 1e-13)) is Topology.CRITICAL
