"""Compiled midpoint-integration kernel for the coupled SR system.

This mirrors sr._rhs_arrays exactly (a unit test asserts the two paths agree
to machine precision); it exists only because the pure-numpy right-hand side
is dominated by per-call overhead at 9x9 problem sizes.
"""
from __future__ import annotations

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a soft dependency
    HAVE_NUMBA = False


def _rhs(flat, h_t, taus, p, d):
    """d = time derivative of the packed 36-component state (in-place)."""
    x = flat[0:9]
    x_r = flat[9:18]
    lam_l = flat[18:27]
    lam_lr = flat[27:36]

    t_mat = np.zeros((9, 9), dtype=np.complex128)
    for mu in range(8):
        amp = x[mu + 1]
        if amp != 0:
            t_mat += amp * taus[mu]
    t2 = 0.5 * (t_mat @ t_mat)
    em = -t_mat + t2
    for i in range(9):
        em[i, i] += 1.0
    ep = t_mat + t2
    for i in range(9):
        ep[i, i] += 1.0
    hbar = em @ (h_t @ ep)

    xr_mat = np.zeros((9, 9), dtype=np.complex128)
    for mu in range(8):
        amp = x_r[mu + 1]
        if amp != 0:
            xr_mat += amp * taus[mu]
    for i in range(9):
        xr_mat[i, i] += x_r[0]

    b = hbar[:, 0].copy()
    a_vec = xr_mat[:, 0].copy()

    row_l = lam_l[1:] @ p
    row_l[0] += lam_l[0]
    row_lr = lam_lr[1:] @ p
    row_lr[0] += lam_lr[0]

    u1 = row_l @ hbar
    u2 = row_lr @ hbar
    c = hbar @ a_vec
    rlx = row_l @ xr_mat
    w = rlx @ hbar

    xr_b = xr_mat @ b

    for mu in range(8):
        d[mu + 1] = -1j * (p[mu] @ b)
        d[mu + 10] = -1j * (p[mu] @ c - p[mu] @ xr_b)
        tau = taus[mu]
        rl_tau = row_l @ tau
        rlr_tau = row_lr @ tau
        rlx_tau = rlx @ tau
        ta = tau @ a_vec
        d[mu + 19] = 1j * (u1 @ p[mu] - rl_tau @ b)
        d[mu + 28] = 1j * (
            (u2 @ p[mu] - rlr_tau @ b)
            + (u1 @ ta - rl_tau @ c - w @ p[mu] + rlx_tau @ b)
        )
    d[0] = 0.0
    d[9] = 0.0
    d[18] = 0.0
    d[27] = 0.0


def _run(y0, n_steps, dt, h0, hp, t_pulse, taus, p, states):
    y = y0.copy()
    states[0] = y
    half = np.empty(36, dtype=np.complex128)
    d = np.empty(36, dtype=np.complex128)
    for k in range(n_steps):
        t = k * dt
        h_a = hp if 0.0 < t < t_pulse else h0
        tm = t + 0.5 * dt
        h_b = hp if 0.0 < tm < t_pulse else h0
        _rhs(y, h_a, taus, p, d)
        half[:] = y + (0.5 * dt) * d
        _rhs(half, h_b, taus, p, d)
        y = y + dt * d
        states[k + 1] = y
    return states


if HAVE_NUMBA:
    _rhs = numba.njit(cache=True)(_rhs)
    _run = numba.njit(cache=True)(_run)


def run_midpoint(y0: np.ndarray, n_steps: int, dt: float, h0: np.ndarray,
                 hp: np.ndarray, t_pulse: float, exc) -> np.ndarray:
    """Integrate the packed SR state; returns the (n_steps+1, 36) history."""
    states = np.empty((n_steps + 1, 36), dtype=np.complex128)
    return _run(
        np.ascontiguousarray(y0, dtype=np.complex128),
        n_steps,
        float(dt),
        np.ascontiguousarray(h0, dtype=np.complex128),
        np.ascontiguousarray(hp, dtype=np.complex128),
        float(t_pulse),
        np.ascontiguousarray(exc.taus, dtype=np.complex128),
        np.ascontiguousarray(exc.ref_rows, dtype=np.complex128),
        states,
    )
