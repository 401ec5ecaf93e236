"""Dense complex linear algebra used by every other module.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``; the
helpers here validate shape and finiteness, diagonalize (Hermitian or
general), exponentiate, and propagate states under a non-Hermitian
generator with renormalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

import numpy as np

from .errors import NoConvergence, NotHermitian, Overflow, ZeroNorm

HERMITIAN_TOL = 1e-12
ZERO_EIGENVALUE_TOL = 1e-12
NEAR_DEFECTIVE_CONDITION = 1e8
RESIDUAL_TOL = 1e-9
# Internal propagation lattice (units of 1/J2); independent of any output grid.
DEFAULT_STEP = 0.01


def as_cmatrix(M) -> np.ndarray:
    """Return ``M`` as a square, finite complex128 array (copy-free when possible)."""
    A = np.asarray(M, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise ValueError(f"expected a non-empty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def as_cvector(v, dim: int | None = None) -> np.ndarray:
    x = np.asarray(v, dtype=np.complex128)
    if x.ndim != 1 or x.size == 0:
        raise ValueError(f"expected a non-empty vector, got shape {x.shape}")
    if dim is not None and x.size != dim:
        raise ValueError(f"vector has length {x.size}, expected {dim}")
    if not np.all(np.isfinite(x)):
        raise ValueError("vector has non-finite entries")
    return x


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues and unit-norm right eigenvectors (columns of ``vectors``).

    Eigenvalues are sorted by ascending real part, ties broken by ascending
    imaginary part.
    """

    eigenvalues: np.ndarray
    vectors: np.ndarray
    residual_max: float
    vec_condition: float

    @property
    def near_defective(self) -> bool:
        """True when the eigenvector matrix is too ill-conditioned to invert."""
        return not self.vec_condition <= NEAR_DEFECTIVE_CONDITION

    @property
    def right_vectors(self) -> list[np.ndarray]:
        return [self.vectors[:, j] for j in range(self.vectors.shape[1])]

    def __len__(self) -> int:
        return self.eigenvalues.size


def fix_phase(v: np.ndarray) -> np.ndarray:
    """Rotate ``v`` so its largest-magnitude component is real and positive.

    Among components within a relative 1e-8 of the maximum magnitude the
    first one wins, so the choice does not flip on rounding noise.
    """
    mag = np.abs(v)
    top = mag.max()
    if top == 0.0:
        return v
    k = int(np.flatnonzero(mag >= top * (1.0 - 1e-8))[0])
    return v * (np.conj(v[k]) / mag[k])


def _fix_phases(V: np.ndarray) -> np.ndarray:
    return np.column_stack([fix_phase(V[:, j]) for j in range(V.shape[1])])


def _sort_order(w: np.ndarray) -> np.ndarray:
    """Indices sorting ``w`` by real part, then imaginary part among real-part ties."""
    tie = 1e-9 * max(1.0, float(np.abs(w).max()))
    by_re = np.argsort(w.real, kind="stable")
    order: list[int] = []
    start = 0
    for i in range(1, by_re.size + 1):
        if i == by_re.size or w.real[by_re[i]] - w.real[by_re[i - 1]] > tie:
            block = by_re[start:i]
            order.extend(block[np.argsort(w.imag[block], kind="stable")])
            start = i
    return np.asarray(order, dtype=int)


def _residual(M: np.ndarray, w: np.ndarray, V: np.ndarray) -> float:
    return float(np.linalg.norm(M @ V - V * w, axis=0).max())


def _condition(V: np.ndarray) -> float:
    with np.errstate(all="ignore"):
        c = float(np.linalg.cond(V))
    return c if np.isfinite(c) else math.inf


def hermiticity_error(M) -> float:
    A = np.asarray(M, dtype=np.complex128)
    return float(np.abs(A - A.conj().T).max())


def jacobi_eigh(M, tol: float = 1e-15, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic complex Jacobi diagonalization of a Hermitian matrix.

    Rotations are applied until the off-diagonal Frobenius norm drops below
    ``tol * ||M||_F``; the check runs after every rotation, so the final
    off-diagonal mass tracks ``tol`` instead of overshooting by a full sweep.
    Returns unsorted ``(eigenvalues, vectors)``.
    """
    A = as_cmatrix(M).copy()
    n = A.shape[0]
    Q = np.eye(n, dtype=np.complex128)
    scale = max(float(np.linalg.norm(A)), np.finfo(float).tiny)
    target = (tol * scale) ** 2

    def off2() -> float:
        return float(np.linalg.norm(A - np.diag(np.diag(A))) ** 2)

    remaining = off2()
    for _ in range(max_sweeps):
        if remaining <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                b = A[p, q]
                mag = abs(b)
                if mag == 0.0:
                    continue
                alpha, beta = A[p, p].real, A[q, q].real
                theta = (beta - alpha) / (2.0 * mag)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(1.0, theta))
                c = 1.0 / math.hypot(1.0, t)
                s = t * c
                # V = diag(1, e^{-i phi}) @ [[c, s], [-s, c]] zeroes A[p, q]
                ph = np.conj(b) / mag
                R = np.array([[c, s], [-s * ph, c * ph]], dtype=np.complex128)
                idx = [p, q]
                A[:, idx] = A[:, idx] @ R
                A[idx, :] = R.conj().T @ A[idx, :]
                A[p, q] = A[q, p] = 0.0
                A[p, p] = A[p, p].real
                A[q, q] = A[q, q].real
                Q[:, idx] = Q[:, idx] @ R
                remaining -= 2.0 * mag * mag
                if remaining <= target:
                    remaining = off2()
                    if remaining <= target:
                        return np.real(np.diag(A)).copy(), Q
        remaining = off2()
    if remaining > target:
        raise NoConvergence(f"Jacobi sweep cap {max_sweeps} exceeded")
    return np.real(np.diag(A)).copy(), Q


def eig_hermitian(M, *, method: str = "lapack", tol: float = 1e-15) -> EigenSystem:
    """Diagonalize a Hermitian matrix.

    Parameters
    ----------
    M : array_like
        Square matrix with ``max|M - M^H| <= 1e-12``.
    method : {"lapack", "jacobi"}
        ``"lapack"`` calls ``numpy.linalg.eigh``; ``"jacobi"`` uses the
        in-house cyclic Jacobi solver with stopping tolerance ``tol``.

    Returns
    -------
    EigenSystem
        Real ascending eigenvalues (values below 1e-12 in magnitude set to
        zero) and orthonormal, phase-fixed eigenvectors.
    """
    A = as_cmatrix(M)
    err = hermiticity_error(A)
    if err > HERMITIAN_TOL:
        raise NotHermitian(f"max|M - M^H| = {err:.3e}")
    if method == "lapack":
        try:
            w, V = np.linalg.eigh(A)
        except np.linalg.LinAlgError as exc:
            raise NoConvergence(str(exc)) from exc
    elif method == "jacobi":
        w, V = jacobi_eigh(A, tol=tol)
        order = np.argsort(w, kind="stable")
        w, V = w[order], V[:, order]
    else:
        raise ValueError(f"unknown method {method!r}")
    w = np.where(np.abs(w) <= ZERO_EIGENVALUE_TOL, 0.0, w)
    V = _fix_phases(V)
    return EigenSystem(
        eigenvalues=w.astype(np.complex128),
        vectors=V,
        residual_max=_residual(A, w, V),
        vec_condition=_condition(V),
    )


def eig_general(M) -> EigenSystem:
    """Diagonalize an arbitrary square matrix with LAPACK ``geev``.

    Near an exceptional point the eigenvector matrix becomes singular;
    check ``near_defective`` before inverting ``vectors``.
    """
    A = as_cmatrix(M)
    try:
        w, V = np.linalg.eig(A)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    V = V / np.linalg.norm(V, axis=0)
    order = _sort_order(w)
    w, V = w[order], _fix_phases(V[:, order])
    res = _residual(A, w, V)
    if res > RESIDUAL_TOL * max(1.0, float(np.linalg.norm(A, 2))):
        raise NoConvergence(f"eigen-residual {res:.3e} above tolerance")
    return EigenSystem(eigenvalues=w, vectors=V, residual_max=res, vec_condition=_condition(V))


# Scaling-and-squaring with diagonal Pade approximants (Higham 2005 thresholds).
_PADE_ORDERS = (3, 5, 7, 9, 13)
_PADE_THETA = {
    3: 1.495585217958292e-2,
    5: 2.539398330063230e-1,
    7: 9.504178996162932e-1,
    9: 2.097847961257068e0,
    13: 5.371920351148152e0,
}


@lru_cache(maxsize=None)
def _pade_coefficients(m: int) -> tuple[float, ...]:
    f = math.factorial
    return tuple(
        f(2 * m - k) * f(m) / (f(2 * m) * f(k) * f(m - k)) for k in range(m + 1)
    )


def _pade(A: np.ndarray, m: int) -> np.ndarray:
    b = _pade_coefficients(m)
    n = A.shape[0]
    ident = np.eye(n, dtype=A.dtype)
    A2 = A @ A
    if m == 13:
        A4 = A2 @ A2
        A6 = A4 @ A2
        U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
                 + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * ident)
        V = A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * ident
    else:
        powers = [ident, A2]
        for _ in range(2, m // 2 + 1):
            powers.append(powers[-1] @ A2)
        U = A @ sum(b[2 * j + 1] * powers[j] for j in range(m // 2 + 1))
        V = sum(b[2 * j] * powers[j] for j in range(m // 2 + 1))
    return np.linalg.solve(V - U, V + U)


def expm(M) -> np.ndarray:
    """Matrix exponential by scaling and squaring a diagonal Pade approximant.

    Never diagonalizes, so defective matrices (exceptional points) are
    handled like any other input.

    Raises
    ------
    Overflow
        If any entry of the result is not representable.
    """
    A = as_cmatrix(M)
    norm1 = float(np.linalg.norm(A, 1))
    with np.errstate(over="ignore", invalid="ignore"):
        for m in _PADE_ORDERS[:-1]:
            if norm1 <= _PADE_THETA[m]:
                E = _pade(A, m)
                break
        else:
            s = max(0, math.ceil(math.log2(norm1 / _PADE_THETA[13]))) if norm1 > 0 else 0
            E = _pade(A / 2.0**s, 13)
            for _ in range(s):
                E = E @ E
    if not np.all(np.isfinite(E)):
        raise Overflow("matrix exponential overflowed; renormalize via Propagator")
    return E


class Propagator:
    """Normalized evolution ``exp(-iHt) psi / ||exp(-iHt) psi||``.

    The state is advanced on a fixed internal lattice of step ``step`` with
    renormalization after every lattice step; requested times off the
    lattice are reached by one extra fractional step that is not fed back
    into the chain. Output states therefore depend only on ``H``, the
    initial state and the requested time, not on how densely times are
    sampled. The accumulated logarithm of the discarded norms is tracked
    so the unnormalized magnitude can be reconstructed without overflow.
    """

    def __init__(self, H, step: float | None = None):
        self.H = as_cmatrix(H)
        if step is None:
            norm1 = float(np.linalg.norm(self.H, 1))
            step = DEFAULT_STEP if norm1 * DEFAULT_STEP <= 1.0 else 1.0 / norm1
        if not step > 0:
            raise ValueError("step must be positive")
        self.step = float(step)
        self._lattice_op = expm(-1j * self.step * self.H)
        self._fractional: dict[float, np.ndarray] = {}

    def _fraction_op(self, frac: float) -> np.ndarray:
        key = round(frac, 12)
        op = self._fractional.get(key)
        if op is None:
            op = expm(-1j * (key * self.step) * self.H)
            self._fractional[key] = op
        return op

    def _split(self, t: float) -> tuple[int, float]:
        x = t / self.step
        m = math.floor(x)
        frac = x - m
        if frac > 1.0 - 1e-9:
            return m + 1, 0.0
        if frac < 1e-9:
            return m, 0.0
        return m, frac

    def run(self, psi0, times: Iterable[float]) -> tuple[np.ndarray, np.ndarray]:
        """Normalized states and log-norms at non-decreasing ``times``.

        Returns
        -------
        states : ndarray, shape (len(times), dim)
        log_norms : ndarray, shape (len(times),)
            ``log ||exp(-iHt) psi0||`` for each requested time.
        """
        dim = self.H.shape[0]
        psi = as_cvector(psi0, dim)
        n0 = float(np.linalg.norm(psi))
        if abs(n0 - 1.0) > 1e-8:
            raise ValueError(f"initial state must be unit-norm, got norm {n0!r}")
        psi = psi / n0
        ts = np.asarray(list(times), dtype=float)
        if ts.size and (ts[0] < 0 or np.any(np.diff(ts) < 0)):
            raise ValueError("times must be non-negative and non-decreasing")
        U = self._lattice_op
        states = np.empty((ts.size, dim), dtype=np.complex128)
        logs = np.empty(ts.size)
        m_cur, log_cur = 0, 0.0
        for i, t in enumerate(ts):
            m, frac = self._split(float(t))
            while m_cur < m:
                psi = U @ psi
                nrm = math.sqrt(float(np.vdot(psi, psi).real))
                if not (nrm > 0.0 and math.isfinite(nrm)):
                    raise ZeroNorm(f"state norm {nrm!r} at t = {(m_cur + 1) * self.step:g}")
                psi = psi / nrm
                log_cur += math.log(nrm)
                m_cur += 1
            if frac == 0.0:
                states[i] = psi
                logs[i] = log_cur
                continue
            out = self._fraction_op(frac) @ psi
            nrm = math.sqrt(float(np.vdot(out, out).real))
            if not (nrm > 0.0 and math.isfinite(nrm)):
                raise ZeroNorm(f"state norm {nrm!r} at t = {t:g}")
            states[i] = out / nrm
            logs[i] = log_cur + math.log(nrm)
        return states, logs


def propagate_with_log_norm(H, psi0, t: float, step: float | None = None) -> tuple[np.ndarray, float]:
    if t < 0:
        raise ValueError("t must be non-negative")
    states, logs = Propagator(H, step).run(psi0, [t])
    return states[0], float(logs[0])


def propagate_normalized(H, psi0, t: float, step: float | None = None) -> np.ndarray:
    """Return ``exp(-iHt) psi0`` normalized to unit length."""
    return propagate_with_log_norm(H, psi0, t, step)[0]


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """``|<a|b>|^2`` for unit vectors."""
    return float(abs(np.vdot(a, b)) ** 2)
