"""Dense complex linear algebra shared by every other module.

Everything here operates on plain numpy arrays: square matrices are
``(n, n)`` complex (or real) ndarrays, vectors are ``(n,)`` ndarrays.
The problem sizes are 8x8 and 9x9 throughout, so LAPACK via
numpy/scipy is used without further ceremony.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import ConvergenceFailure, DefectiveMatrix, NonFiniteState, NonHermitianInput

HERMITIAN_TOL = 1e-12
BIORTH_TOL = 1e-10


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(m)
    return bool(np.abs(m - m.conj().T).max() <= tol)


def _phase_fix_columns(v: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude entry is real positive."""
    v = v.copy()
    for k in range(v.shape[1]):
        i = int(np.argmax(np.abs(v[:, k])))
        pivot = v[i, k]
        if pivot != 0:
            v[:, k] *= np.abs(pivot) / pivot
    return v


def eig_hermitian(m: np.ndarray):
    """Eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues ascending, eigenvector columns). Each column is
    gauge-fixed so its largest-magnitude component is real and positive.
    """
    m = np.asarray(m)
    if not is_hermitian(m):
        raise NonHermitianInput("matrix fails the hermiticity check (tol 1e-12)")
    try:
        w, v = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    return w, _phase_fix_columns(v.astype(complex))


def eig_general(m: np.ndarray):
    """Eigendecomposition of a general (non-Hermitian) square matrix.

    Returns (eigenvalues, right, left) sorted by ascending real part of the
    eigenvalue, with the pairs biorthonormalized in the transpose convention:
    ``left[:, j].T @ right[:, k] = delta_jk``. Right columns are scaled to
    unit Euclidean norm (after a deterministic phase fix), then the left
    columns absorb the biorthonormalization factor.
    """
    m = np.asarray(m, dtype=complex)
    try:
        w, vr = scipy.linalg.eig(m)
        wl, vl = scipy.linalg.eig(m.T)
    except Exception as exc:  # pragma: no cover - LAPACK failure
        raise ConvergenceFailure(str(exc)) from exc

    order_r = np.lexsort((w.imag, w.real))
    order_l = np.lexsort((wl.imag, wl.real))
    w = w[order_r]
    vr = _phase_fix_columns(vr[:, order_r])
    vl = vl[:, order_l]

    vr = vr / np.linalg.norm(vr, axis=0)
    overlap = vl.T @ vr
    if np.abs(np.diag(overlap)).min() < BIORTH_TOL:
        raise DefectiveMatrix("left/right eigenvector overlap below 1e-10")
    # Off-diagonal entries are already ~0 between distinct eigenvalues;
    # the inverse also cleans up mixing inside near-degenerate clusters.
    vl = vl @ np.linalg.inv(overlap).T
    return w, vr, vl


def expm(m: np.ndarray) -> np.ndarray:
    """Matrix exponential via truncated power series with scaling-and-squaring.

    The series terminates exactly for nilpotent input; scaling keeps the
    series short and stable when the max-norm exceeds 1.
    """
    m = np.asarray(m)
    n = m.shape[0]
    scale = 0
    norm = np.abs(m).max() if m.size else 0.0
    while norm > 1.0:
        norm /= 2.0
        scale += 1
    a = m / (2 ** scale)
    result = np.eye(n, dtype=a.dtype if np.iscomplexobj(a) else float)
    term = result
    for k in range(1, 60):
        term = term @ a / k
        result = result + term
        if np.abs(term).max() <= 1e-16:
            break
    for _ in range(scale):
        result = result @ result
    return result


def midpoint_step(rhs, y, t: float, dt: float):
    """One explicit midpoint (RK2) step: purely functional, no hidden state."""
    half = y + (0.5 * dt) * rhs(t, y)
    out = y + dt * rhs(t + 0.5 * dt, half)
    if not np.all(np.isfinite(np.asarray(out).view(float))):
        raise NonFiniteState(f"non-finite state after step at t={t}")
    return out
