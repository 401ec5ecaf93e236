import math

import mpmath
import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ptssh.errors import NotHermitian, Overflow, ZeroNorm
from ptssh.hamiltonian import LatticeParams, build_gamma, build_pt, build_ssh
from ptssh.matrixcore import (
    Propagator,
    as_cmatrix,
    eig_general,
    eig_hermitian,
    expm,
    fidelity,
    fix_phase,
    propagate_normalized,
    propagate_with_log_norm,
)

finite = st.floats(-3, 3, allow_nan=False, allow_infinity=False)


def cmat(n):
    return st.builds(
        lambda re, im: re + 1j * im,
        arrays(np.float64, (n, n), elements=finite),
        arrays(np.float64, (n, n), elements=finite),
    )


def unit_vector(n):
    return st.builds(
        lambda re, im: (re + 1j * im) / np.linalg.norm(re + 1j * im),
        arrays(np.float64, n, elements=st.floats(0.1, 1)),
        arrays(np.float64, n, elements=st.floats(-1, 1)),
    )


# ---------------------------------------------------------------- validation


def test_as_cmatrix_rejects_bad_shapes_and_values():
    with pytest.raises(ValueError):
        as_cmatrix(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        as_cmatrix(np.array([[np.nan]]))


# ---------------------------------------------------------------- eig_hermitian


def test_identity_gives_unit_eigenvalues_and_standard_basis():
    es = eig_hermitian(np.eye(4))
    assert np.allclose(es.eigenvalues, 1.0)
    assert np.allclose(np.abs(es.vectors), np.eye(4))


def test_symmetric_pair():
    es = eig_hermitian([[0, 1], [1, 0]])
    assert np.allclose(es.eigenvalues.real, [-1, 1])


def test_ssh_spectrum_mirror_and_midgap_pair():
    es = eig_hermitian(build_ssh(LatticeParams(N=6, J1=0.5)))
    w = es.eigenvalues.real
    assert np.allclose(w, -w[::-1], atol=1e-10)
    assert abs(w[5]) < 0.02 and abs(w[6]) < 0.02
    assert abs(w[5]) < 0.05 * abs(w[4])


def test_eig_hermitian_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        eig_hermitian([[0, 1], [0, 0]])


def test_orthonormal_vectors_and_phase_convention():
    es = eig_hermitian(build_ssh(LatticeParams(N=5, J1=0.7)))
    V = es.vectors
    assert np.abs(V.conj().T @ V - np.eye(10)).max() < 1e-10
    for v in es.right_vectors:
        mag = np.abs(v)
        k = np.flatnonzero(mag >= mag.max() * (1 - 1e-8))[0]
        assert abs(v[k].imag) < 1e-12 and v[k].real > 0


def test_small_eigenvalues_are_zeroed():
    es = eig_hermitian(np.diag([1e-13, 1.0]))
    assert es.eigenvalues[0] == 0.0


def test_jacobi_matches_lapack():
    rng = np.random.default_rng(3)
    A = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    A = A + A.conj().T
    a = eig_hermitian(A)
    b = eig_hermitian(A, method="jacobi")
    assert np.allclose(a.eigenvalues, b.eigenvalues, atol=1e-12)
    assert np.abs(a.vectors - b.vectors).max() < 1e-9
    assert b.residual_max < 1e-12


@settings(max_examples=40, deadline=None)
@given(cmat(5))
def test_general_and_hermitian_solvers_agree_on_hermitian_input(M):
    H = M + M.conj().T
    a = eig_hermitian(H).eigenvalues.real
    b = eig_general(H).eigenvalues
    assert np.abs(b.imag).max() < 1e-9
    assert np.allclose(np.sort(b.real), a, atol=1e-9)


# ---------------------------------------------------------------- eig_general


def test_pt_dimer_closed_form():
    es = eig_general([[0.5j, 1], [1, -0.5j]])
    assert np.allclose(es.eigenvalues, [-math.sqrt(0.75), math.sqrt(0.75)], atol=1e-12)
    assert not es.near_defective


def test_pt_dimer_exceptional_point_flagged():
    es = eig_general([[1j, 1], [1, -1j]])
    assert np.abs(es.eigenvalues).max() < 1e-7
    assert es.near_defective


def test_diagonal_imaginary():
    es = eig_general(np.diag([2j, -2j]))
    assert np.allclose(es.eigenvalues, [-2j, 2j])
    assert np.allclose(np.abs(es.vectors), [[0, 1], [1, 0]])


def test_sort_order_real_then_imag():
    es = eig_general(np.diag([1 + 1j, 1 - 1j, -2 + 0j]))
    assert np.allclose(es.eigenvalues, [-2, 1 - 1j, 1 + 1j])


def test_pt_spectrum_squares_to_hermitian_minus_gamma_squared():
    # Gamma anticommutes with H_SSH, so H_PT^2 = H_SSH^2 - gamma^2 exactly.
    p = LatticeParams(N=6, J1=0.5, gamma=1.0)
    E = eig_hermitian(build_ssh(p)).eigenvalues.real
    w = eig_general(build_pt(p)).eigenvalues
    assert np.allclose(np.sort_complex(w**2), np.sort_complex(E.astype(complex) ** 2 - 1.0), atol=1e-9)
    H, G = build_pt(p), build_gamma(p)
    assert np.abs(H @ H - (build_ssh(p) @ build_ssh(p) - p.gamma**2 * np.eye(12))).max() < 1e-12
    assert G.shape == (12, 12)


def test_eigensystem_residual_bound():
    es = eig_general(build_pt(LatticeParams(N=6, J1=0.5, gamma=0.3)))
    assert es.residual_max < 1e-9
    assert np.allclose(np.linalg.norm(es.vectors, axis=0), 1.0)


# ---------------------------------------------------------------- expm


def test_expm_trivial_cases():
    assert np.allclose(expm(np.zeros((3, 3))), np.eye(3))
    a, b = 1 + 2j, -3.0
    assert np.allclose(expm(np.diag([a, b])), np.diag([np.exp(a), np.exp(b)]), rtol=1e-14)
    assert np.allclose(expm([[0, 1], [0, 0]]), [[1, 1], [0, 1]], atol=1e-15)


def test_expm_against_high_precision_reference():
    rng = np.random.default_rng(7)
    for scale in (0.01, 0.5, 3.0, 20.0):
        M = scale * (rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))) / 5
        with mpmath.workdps(40):
            ref = np.array(mpmath.expm(mpmath.matrix(M.tolist())).tolist(), dtype=complex)
        assert np.abs(expm(M) - ref).max() <= 1e-12 * max(1.0, np.abs(ref).max())


def test_expm_matches_scipy_at_exceptional_point():
    M = -1j * 3.0 * np.array([[1j, 1], [1, -1j]])
    assert np.allclose(expm(M), scipy.linalg.expm(M), rtol=1e-13, atol=1e-13)


def test_expm_overflow():
    with pytest.raises(Overflow):
        expm(np.diag([800.0, 0.0]))


@settings(max_examples=60, deadline=None)
@given(cmat(4), st.floats(0.01, 10))
def test_expm_inverse_property(M, norm):
    nrm = np.linalg.norm(M, 2)
    if nrm == 0:
        return
    A = M * (norm / nrm)
    assert np.abs(expm(A) @ expm(-A) - np.eye(4)).max() < 1e-8


# ---------------------------------------------------------------- propagation


def test_stationary_eigenvector():
    H = build_ssh(LatticeParams(N=4, J1=0.6))
    v = eig_hermitian(H).vectors[:, 2]
    assert fidelity(propagate_normalized(H, v, 37.3), v) > 1 - 1e-10


def test_gain_on_a_selects_a_component():
    p = LatticeParams(N=1 + 1, J1=1.0)
    H = 1j * 0.5 * build_gamma(p)
    psi = np.ones(4) / 2
    out = propagate_normalized(H, psi, 60.0)
    assert np.abs(out[1::2]).max() < 1e-12
    assert np.allclose(np.abs(out[0::2]), 1 / math.sqrt(2))


def test_fully_broken_ground_state_reaches_dominant_mode_by_t50():
    # Stays red: Gamma maps phi_1 onto phi_2N, so the ground state spans an
    # H_PT-invariant plane and the dominant mode is reached only once rounding
    # noise has grown (around t = 85).
    p = LatticeParams(N=6, J1=0.5, gamma=2.8)
    H = build_pt(p)
    psi0 = eig_hermitian(build_ssh(p)).vectors[:, 0]
    w = eig_general(H)
    vmax = w.vectors[:, np.argmax(w.eigenvalues.imag)]
    assert fidelity(propagate_normalized(H, psi0, 50.0), vmax) > 0.999


def test_fully_broken_ground_state_reaches_dominant_mode_late():
    p = LatticeParams(N=6, J1=0.5, gamma=2.8)
    H = build_pt(p)
    psi0 = eig_hermitian(build_ssh(p)).vectors[:, 0]
    w = eig_general(H)
    vmax = w.vectors[:, np.argmax(w.eigenvalues.imag)]
    assert fidelity(propagate_normalized(H, psi0, 100.0), vmax) > 0.999


def test_fully_broken_generic_state_reaches_dominant_mode_by_t50():
    p = LatticeParams(N=6, J1=0.5, gamma=2.8)
    H = build_pt(p)
    rng = np.random.default_rng(11)
    psi0 = rng.normal(size=12) + 1j * rng.normal(size=12)
    psi0 /= np.linalg.norm(psi0)
    w = eig_general(H)
    vmax = w.vectors[:, np.argmax(w.eigenvalues.imag)]
    assert fidelity(propagate_normalized(H, psi0, 50.0), vmax) > 0.999


def test_log_norm_matches_direct_exponential():
    p = LatticeParams(N=3, J1=0.5, gamma=1.2)
    H = build_pt(p)
    psi0 = np.zeros(6, complex)
    psi0[0] = 1
    out, log_norm = propagate_with_log_norm(H, psi0, 2.37)
    ref = scipy.linalg.expm(-1j * 2.37 * H) @ psi0
    assert math.isclose(log_norm, math.log(np.linalg.norm(ref)), rel_tol=1e-12)
    assert fidelity(out, ref / np.linalg.norm(ref)) > 1 - 1e-12


def test_log_norm_survives_where_raw_exponential_overflows():
    H = np.diag([5j, -5j])
    psi0 = np.array([1, 1]) / math.sqrt(2)
    out, log_norm = propagate_with_log_norm(H, psi0, 200.0)
    assert math.isclose(log_norm, 1000.0 + math.log(1 / math.sqrt(2)), rel_tol=1e-12)
    assert abs(abs(out[0]) - 1) < 1e-12


def test_zero_norm_detected():
    H = np.diag([-1000j, -1000j])
    with pytest.raises(ZeroNorm):
        propagate_normalized(H, np.array([1.0, 0.0]), 10.0, step=1.0)


def test_propagator_rejects_bad_input():
    P = Propagator(np.eye(2))
    with pytest.raises(ValueError):
        P.run([2.0, 0.0], [0.0])
    with pytest.raises(ValueError):
        P.run([1.0, 0.0], [1.0, 0.5])


def test_outputs_do_not_depend_on_sampling_density():
    p = LatticeParams(N=6, J1=0.5, gamma=1.0)
    H = build_pt(p)
    psi0 = eig_hermitian(build_ssh(p)).vectors[:, 0]
    coarse, _ = Propagator(H).run(psi0, np.arange(0, 61) * 1.0)
    fine, _ = Propagator(H).run(psi0, np.arange(0, 601) * 0.1)
    assert np.abs(coarse - fine[::10]).max() < 1e-12


def test_internal_step_converges_while_dynamics_is_deterministic():
    # Before rounding-seeded modes can grow, halving the internal lattice step
    # changes nothing beyond roundoff.
    p = LatticeParams(N=6, J1=0.5, gamma=1.0)
    H = build_pt(p)
    psi0 = eig_hermitian(build_ssh(p)).vectors[:, 0]
    ts = np.linspace(0, 20, 81)
    a, _ = Propagator(H, 0.01).run(psi0, ts)
    b, _ = Propagator(H, 0.005).run(psi0, ts)
    assert min(fidelity(x, y) for x, y in zip(a, b)) > 1 - 1e-10


@settings(max_examples=30, deadline=None)
@given(unit_vector(6), st.floats(0.0, 5.0), st.floats(0.0, 5.0), st.floats(0.0, 2.5))
def test_semigroup_property(psi, t1, t2, gamma):
    H = build_pt(LatticeParams(N=3, J1=0.5, gamma=gamma))
    direct = propagate_normalized(H, psi, t1 + t2)
    split = propagate_normalized(H, propagate_normalized(H, psi, t1), t2)
    assert fidelity(direct, split) > 1 - 1e-8


@settings(max_examples=30, deadline=None)
@given(unit_vector(6), st.floats(0.0, 10.0), st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False))
def test_shift_only_changes_phase(psi, t, c):
    H = build_pt(LatticeParams(N=3, J1=0.8, gamma=0.4))
    a = propagate_normalized(H, psi, t)
    b = propagate_normalized(H + c * np.eye(6), psi, t)
    assert fidelity(a, b) > 1 - 1e-10


def test_fix_phase_prefers_first_of_near_ties():
    v = np.array([1j, -1.0 + 1e-12]) / math.sqrt(2)
    out = fix_phase(v)
    assert out[0].real > 0 and abs(out[0].imag) < 1e-15
