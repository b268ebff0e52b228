"""Time-dependent second-response propagation: initial conditions, coupled
equations of motion for the three response vectors, the observable formula,
probabilities/coherences, and the closed-form field-free solutions.

State layout: all four amplitude vectors carry a scalar slot at index 0 and
the eight excitation amplitudes at indices 1..8.  Scalar slots never evolve.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import model
from .eom import EomSolution, Superposition, double_commutator_tensor, f_matrix, y_coefficients
from .errors import DimensionMismatch, IndexOutOfRange, NearResonantDenominator, NonFiniteState
from .exact import TimeSeries
from .ground import GroundSolution, exp_cluster
from .model import ExcitationSet, ModelParams

DENOM_TOL = 1e-8


@dataclass(frozen=True)
class SrState:
    """The four TD amplitude vectors at one instant (each shape (9,))."""

    x: np.ndarray
    x_r: np.ndarray
    lam_l: np.ndarray
    lam_lr: np.ndarray
    t: float

    def pack(self) -> np.ndarray:
        return np.concatenate([self.x, self.x_r, self.lam_l, self.lam_lr])

    @classmethod
    def unpack(cls, flat: np.ndarray, t: float) -> "SrState":
        return cls(
            x=flat[0:9], x_r=flat[9:18], lam_l=flat[18:27], lam_lr=flat[27:36], t=t
        )


@dataclass(frozen=True)
class SrTrajectory:
    times: np.ndarray        # (n+1,)
    states: np.ndarray       # (n+1, 36) packed complex

    def state_at(self, k: int) -> SrState:
        return SrState.unpack(self.states[k], float(self.times[k]))


def _body_operator(amps9: np.ndarray, exc: ExcitationSet) -> np.ndarray:
    """Matrix of scalar + sum_mu amps[mu] tau_mu."""
    mat = np.tensordot(amps9[1:], exc.taus, axes=(0, 0))
    if amps9[0] != 0:
        mat = mat + amps9[0] * np.eye(mat.shape[0])
    return mat


def _left_row9(amps9: np.ndarray, exc: ExcitationSet) -> np.ndarray:
    """Row <0|(amps[0] + sum_mu amps[mu] tau_mu^dagger)."""
    row = amps9[1:] @ exc.ref_rows.astype(complex)
    row[0] += amps9[0]
    return row


def _lambda_op_columns(eom: EomSolution, exc: ExcitationSet) -> np.ndarray:
    """(9, 8) array whose column N is the row vector of <0|Lambda^N as amplitudes."""
    cols = np.zeros((9, 8), dtype=complex)
    cols[1:, :] = eom.lam_vecs
    return cols


def lambda_l_e0(sup: Superposition, eom: EomSolution) -> np.ndarray:
    """lambda_l^E(0): sum_N conj(C_N) Lambda^N (no scalar part)."""
    out = np.zeros(9, dtype=complex)
    out[1:] = eom.lam_vecs @ sup.coefficient_vector().conj()
    return out


def lambda_r_e0(sup: Superposition, eom: EomSolution, h0: np.ndarray,
                exc: ExcitationSet) -> np.ndarray:
    """lambda_r^E(0) = -sum_{N,I} C_N F[N,I] Lambda^I / (Omega_N + Omega_I)."""
    f = f_matrix(eom, h0, exc)
    c = sup.coefficient_vector()
    w = eom.omegas
    coeffs = -(c[:, None] * f / (w[:, None] + w[None, :])).sum(axis=0)
    out = np.zeros(9, dtype=complex)
    out[1:] = eom.lam_vecs @ coeffs
    return out


def _l0_vector(ground: GroundSolution) -> np.ndarray:
    out = np.zeros(9, dtype=complex)
    out[0] = 1.0
    out[1:] = ground.lam
    return out


def init_sr(sup: Superposition, eom: EomSolution, ground: GroundSolution,
            h0: np.ndarray, exc: ExcitationSet) -> SrState:
    """Initial conditions for the coupled SR system."""
    x = np.zeros(9, dtype=complex)
    x[1:] = ground.t_amp

    x_r = np.zeros(9, dtype=complex)
    x_r[0] = sup.s
    x_r[1:] = eom.x_vecs @ sup.coefficient_vector()

    l0 = _l0_vector(ground)
    lam_le = lambda_l_e0(sup, eom)
    lam_l = np.conjugate(sup.s) * l0 + lam_le

    y = y_coefficients(sup, eom, h0, exc)
    lam_lr = np.zeros(9, dtype=complex)
    lam_lr[1:] = eom.lam_vecs @ y
    lam_lr += sup.s * lam_le + l0 + np.conjugate(sup.s) * lambda_r_e0(sup, eom, h0, exc)
    return SrState(x=x, x_r=x_r, lam_l=lam_l, lam_lr=lam_lr, t=0.0)


def _rhs_arrays(flat: np.ndarray, h_t: np.ndarray, exc: ExcitationSet) -> np.ndarray:
    """Time derivative of the packed state for Hamiltonian matrix h_t."""
    taus = exc.taus
    p = exc.ref_rows                       # (8, 9), real
    x, x_r, lam_l, lam_lr = flat[0:9], flat[9:18], flat[18:27], flat[27:36]

    t_mat = np.tensordot(x[1:], taus, axes=(0, 0))
    t2 = t_mat @ t_mat
    eye = np.eye(9)
    hbar = (eye - t_mat + 0.5 * t2) @ h_t @ (eye + t_mat + 0.5 * t2)

    b = hbar[:, 0]
    xr_mat = _body_operator(x_r, exc)
    a_vec = xr_mat[:, 0]

    row_l = _left_row9(lam_l, exc)
    row_lr = _left_row9(lam_lr, exc)

    u1 = row_l @ hbar
    u2 = row_lr @ hbar
    c = hbar @ a_vec
    r_l = np.tensordot(row_l, taus, axes=(0, 1))      # (8, 9): row_l tau_mu
    r_lr = np.tensordot(row_lr, taus, axes=(0, 1))
    rlx = row_l @ xr_mat
    r_lx = np.tensordot(rlx, taus, axes=(0, 1))       # row_l X_r tau_mu
    ta = np.tensordot(taus, a_vec, axes=(2, 0))       # (8, 9): tau_mu X_r|0>

    d = np.zeros(36, dtype=complex)
    d[1:9] = -1j * (p @ b)
    d[10:18] = -1j * (p @ c - p @ (xr_mat @ b))
    d[19:27] = 1j * (p @ u1 - r_l @ b)
    d[28:36] = 1j * (
        (p @ u2 - r_lr @ b)
        + (ta @ u1 - r_l @ c - p @ (rlx @ hbar) + r_lx @ b)
    )
    return d


def rhs_sr(state: SrState, t: float, params: ModelParams, h0: np.ndarray,
           d: np.ndarray, exc: ExcitationSet) -> SrState:
    """Time derivative of an SrState under H(t); scalar slots stay at zero."""
    h_t = model.hamiltonian_at(t, params, h0, d)
    deriv = _rhs_arrays(state.pack(), h_t, exc)
    return SrState.unpack(deriv, t)


def propagate_sr(state0: SrState, params: ModelParams, h0: np.ndarray,
                 d: np.ndarray, exc: ExcitationSet) -> SrTrajectory:
    """Fixed-step midpoint integration of the coupled SR system.

    The rectangular pulse makes H(t) piecewise constant, so the two
    Hamiltonian matrices are prebuilt and the stepping runs in the compiled
    kernel (an exact mirror of rhs_sr; falls back to the numpy path when
    numba is unavailable).
    """
    from . import _kernel

    dt = params.dt_au
    n = params.n_steps
    times = np.arange(n + 1) * dt
    states = _kernel.run_midpoint(
        state0.pack(), n, dt, h0, h0 - params.f0 * d, params.t_pulse_au, exc
    )
    if not np.all(np.isfinite(states.view(float))):
        raise NonFiniteState("SR propagation produced non-finite amplitudes")
    return SrTrajectory(times=times, states=states)


def _transformed(a: np.ndarray, x: np.ndarray, exc: ExcitationSet) -> np.ndarray:
    """Abar_x = e^-x A e^x with the exactly terminating exponentials."""
    x_mat = np.tensordot(x[1:], exc.taus, axes=(0, 0))
    x2 = x_mat @ x_mat
    eye = np.eye(9)
    return (eye - x_mat + 0.5 * x2) @ a @ (eye + x_mat + 0.5 * x2)


def sr_observable(state: SrState, a: np.ndarray, exc: ExcitationSet) -> complex:
    """<lambda_l [Abar_x, x_r] + lambda_lr Abar_x>_0."""
    if a.shape != (9, 9):
        raise DimensionMismatch(f"operator shape {a.shape}, expected (9, 9)")
    abar = _transformed(a, state.x, exc)
    xr_mat = _body_operator(state.x_r, exc)
    comm_col = abar @ xr_mat[:, 0] - xr_mat @ abar[:, 0]
    row_l = _left_row9(state.lam_l, exc)
    row_lr = _left_row9(state.lam_lr, exc)
    return complex(row_l @ comm_col + row_lr @ abar[:, 0])


def observable_series(traj: SrTrajectory, a: np.ndarray, exc: ExcitationSet,
                      real: bool | None = None) -> TimeSeries:
    """Evaluate sr_observable along a trajectory.

    For Hermitian ``a`` (detected unless overridden) the real part is
    returned; the imaginary residue is a diagnostic of the representation.
    """
    values = np.array([
        sr_observable(traj.state_at(k), a, exc) for k in range(len(traj.times))
    ])
    if real is None:
        real = np.abs(a - a.conj().T).max() <= 1e-12
    return TimeSeries(times=traj.times, values=values.real if real else values)


def projector_operator(i: int, j: int, eom: EomSolution, ground: GroundSolution,
                       exc: ExcitationSet) -> np.ndarray:
    """P_IJ = e^T X^I |0><0| Lambda^J e^-T as a dense 9x9 matrix.

    Index 0 selects the ground pair: X^0 the unit scalar, Lambda^0 = L0.
    """
    if not (0 <= i <= 8 and 0 <= j <= 8):
        raise IndexOutOfRange(f"projector indices ({i}, {j}) outside 0..8")
    e_plus, e_minus = exp_cluster(ground.t_amp, exc)
    e0 = np.zeros(9)
    e0[0] = 1.0
    if i == 0:
        ket = e_plus @ e0
    else:
        xi = np.zeros(9, dtype=complex)
        xi[1:] = eom.x_vecs[:, i - 1]
        ket = e_plus @ (_body_operator(xi, exc) @ e0)
    if j == 0:
        bra = _left_row9(_l0_vector(ground), exc) @ e_minus
    else:
        lj = np.zeros(9, dtype=complex)
        lj[1:] = eom.lam_vecs[:, j - 1]
        bra = _left_row9(lj, exc) @ e_minus
    return np.outer(ket, bra)


def _bch_truncated(a: np.ndarray, x_mat: np.ndarray, order: int = 4) -> np.ndarray:
    """Similarity transform e^-x A e^x as a nested-commutator series."""
    out = a.copy()
    term = a
    for k in range(1, order + 1):
        term = (term @ x_mat - x_mat @ term) / k
        out = out + term
    return out


def sr_observable_paper_mode(state: SrState, a: np.ndarray, exc: ExcitationSet) -> complex:
    """Variant used for the truncated-projector studies: the operator is
    symmetrized first and its similarity transform truncated at fourth order."""
    a_sym = 0.5 * (a + a.conj().T)
    x_mat = np.tensordot(state.x[1:], exc.taus, axes=(0, 0))
    abar = _bch_truncated(a_sym, x_mat, order=4)
    xr_mat = _body_operator(state.x_r, exc)
    comm_col = abar @ xr_mat[:, 0] - xr_mat @ abar[:, 0]
    return complex(
        _left_row9(state.lam_l, exc) @ comm_col
        + _left_row9(state.lam_lr, exc) @ abar[:, 0]
    )


def coherence_sr(traj: SrTrajectory, i: int, j: int, eom: EomSolution,
                 ground: GroundSolution, exc: ExcitationSet,
                 mode: str = "exact") -> TimeSeries:
    """Coherence p_IJ(t) = (ptilde_IJ(t) + conj(ptilde_JI(t))) / 2.

    The pairing enforces conj(p_IJ) = p_JI exactly; diagonal entries are the
    eigenstate probabilities (real part).
    """
    p_ij = projector_operator(i, j, eom, ground, exc)
    p_ji = projector_operator(j, i, eom, ground, exc)
    evaluate = sr_observable if mode == "exact" else sr_observable_paper_mode
    values = np.empty(len(traj.times), dtype=complex)
    for k in range(len(traj.times)):
        state = traj.state_at(k)
        values[k] = 0.5 * (
            evaluate(state, p_ij, exc) + np.conjugate(evaluate(state, p_ji, exc))
        )
    return TimeSeries(times=traj.times, values=values)


def analytic_unperturbed(sup: Superposition, eom: EomSolution, ground: GroundSolution,
                         h0: np.ndarray, exc: ExcitationSet, t: float) -> SrState:
    """Closed-form field-free SR state at time t (phasor solution)."""
    w = eom.omegas
    c = sup.coefficient_vector()
    phase_m = np.exp(-1j * w * t)

    x = np.zeros(9, dtype=complex)
    x[1:] = ground.t_amp

    x_r = np.zeros(9, dtype=complex)
    x_r[0] = sup.s
    x_r[1:] = eom.x_vecs @ (c * phase_m)

    l0 = _l0_vector(ground)
    lam_le = np.zeros(9, dtype=complex)
    lam_le[1:] = eom.lam_vecs @ (c.conj() / phase_m)
    lam_l = np.conjugate(sup.s) * l0 + lam_le

    f = f_matrix(eom, h0, exc)
    lam_re_coeffs = -((c * phase_m)[:, None] * f / (w[:, None] + w[None, :])).sum(axis=0)
    lam_re = np.zeros(9, dtype=complex)
    lam_re[1:] = eom.lam_vecs @ lam_re_coeffs

    b = double_commutator_tensor(eom, h0, exc)
    y = np.zeros(8, dtype=complex)
    active = [n for n in range(8) if c[n] != 0]
    for jj in range(8):
        for m in active:
            for n in active:
                denom = w[m] - w[jj] - w[n]
                if abs(denom) < DENOM_TOL:
                    raise NearResonantDenominator((m + 1, jj + 1, n + 1), denom)
                y[jj] += (
                    c[m].conjugate() * c[n]
                    * np.exp(-1j * (w[n] - w[m]) * t)
                    * b[m, jj, n] / denom
                )
    lam_lr = np.zeros(9, dtype=complex)
    lam_lr[1:] = eom.lam_vecs @ y
    lam_lr += sup.s * lam_le + l0 + np.conjugate(sup.s) * lam_re
    return SrState(x=x, x_r=x_r, lam_l=lam_l, lam_lr=lam_lr, t=t)


def lambda_r_analytic(sup: Superposition, eom: EomSolution, h0: np.ndarray,
                      exc: ExcitationSet, t: float) -> np.ndarray:
    """Closed-form lambda_r^E(t) amplitudes (9,) for the field-free case."""
    f = f_matrix(eom, h0, exc)
    c = sup.coefficient_vector()
    w = eom.omegas
    phase = np.exp(-1j * w * t)
    coeffs = -((c * phase)[:, None] * f / (w[:, None] + w[None, :])).sum(axis=0)
    out = np.zeros(9, dtype=complex)
    out[1:] = eom.lam_vecs @ coeffs
    return out


def propagate_lambda_r_diagnostic(sup: Superposition, eom: EomSolution,
                                  ground: GroundSolution, params: ModelParams,
                                  h0: np.ndarray, exc: ExcitationSet) -> SrTrajectory:
    """Field-free integration of the lambda_r^E equation of motion.

    Test-only coverage of the remaining response equation; the production
    observable path never stores a lambda_r trajectory.  Returns a packed
    trajectory whose lam_lr slot carries lambda_r^E(t).
    """
    taus = exc.taus
    p = exc.ref_rows
    e0 = np.zeros(9)
    e0[0] = 1.0
    hbar = _transformed(h0, np.concatenate([[0], ground.t_amp]).astype(complex), exc)
    row_l0 = _left_row9(_l0_vector(ground), exc)

    x = np.zeros(9, dtype=complex)
    x[1:] = ground.t_amp
    c = sup.coefficient_vector()

    dt = params.dt_au
    n = params.n_steps
    times = np.arange(n + 1) * dt

    def deriv(t, lam_re):
        x_r = np.zeros(9, dtype=complex)
        x_r[0] = sup.s
        x_r[1:] = eom.x_vecs @ (c * np.exp(-1j * eom.omegas * t))
        xr_mat = _body_operator(x_r, exc)
        a_vec = xr_mat[:, 0]
        b_vec = hbar[:, 0]
        u0 = row_l0 @ hbar
        r0 = np.tensordot(row_l0, taus, axes=(0, 1))
        rx = np.tensordot(row_l0 @ xr_mat, taus, axes=(0, 1))
        ta = np.tensordot(taus, a_vec, axes=(2, 0))
        # <L0 [[Hbar,tau_mu], x_r]>_0
        term1 = ta @ u0 - r0 @ (hbar @ a_vec) - p @ ((row_l0 @ xr_mat) @ hbar) + rx @ b_vec
        # <lambda_r^E [Hbar, tau_mu]>_0
        row_r = _left_row9(lam_re, exc)
        term2 = p @ (row_r @ hbar) - np.tensordot(row_r, taus, axes=(0, 1)) @ b_vec
        out = np.zeros(9, dtype=complex)
        out[1:] = 1j * (term1 + term2)
        return out

    states = np.empty((n + 1, 36), dtype=complex)
    lam_re = lambda_r_analytic(sup, eom, h0, exc, 0.0)
    zeros = np.zeros(9, dtype=complex)
    states[0] = np.concatenate([x, zeros, zeros, lam_re])
    for k in range(n):
        t = times[k]
        half = lam_re + (0.5 * dt) * deriv(t, lam_re)
        lam_re = lam_re + dt * deriv(t + 0.5 * dt, half)
        states[k + 1] = np.concatenate([x, zeros, zeros, lam_re])
    return SrTrajectory(times=times, states=states)
