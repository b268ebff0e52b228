"""Equation-of-motion machinery: Jacobian, biorthogonal excitation vectors,
excitation energies, the static F matrix, Y coefficients and transition
matrix elements."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptySuperposition, IndexOutOfRange, NearResonantDenominator
from .ground import GroundSolution, similarity_transform
from .linalg import eig_general
from .model import ExcitationSet

DENOM_TOL = 1e-8


@dataclass(frozen=True)
class Superposition:
    """Initial-state coefficients: ground coefficient s plus a map from
    excited-state index (1..8) to its complex coefficient."""

    s: complex = 0.0
    c: dict = field(default_factory=dict)

    def __post_init__(self):
        for n in self.c:
            if not 1 <= n <= 8:
                raise IndexOutOfRange(f"excited-state index {n} outside 1..8")
        norm2 = abs(self.s) ** 2 + sum(abs(v) ** 2 for v in self.c.values())
        if norm2 == 0:
            raise EmptySuperposition("all superposition coefficients are zero")
        if abs(norm2 - 1.0) > 1e-10:
            warnings.warn(
                f"superposition norm {np.sqrt(norm2):.12f} != 1; renormalizing",
                stacklevel=2,
            )
            scale = 1.0 / np.sqrt(norm2)
            object.__setattr__(self, "s", self.s * scale)
            object.__setattr__(self, "c", {n: v * scale for n, v in self.c.items()})

    def coefficient_vector(self) -> np.ndarray:
        """C_N for N=1..8 as a dense (8,) complex array (0-based storage)."""
        vec = np.zeros(8, dtype=complex)
        for n, v in self.c.items():
            vec[n - 1] = v
        return vec


@dataclass
class EomSolution:
    """Excitation energies with biorthonormal left/right vectors.

    ``x_vecs[:, N]`` and ``lam_vecs[:, N]`` hold the N-th right/left vector
    (N=0..7 storing states 1..8); ``lam_vecs.T @ x_vecs = I``.
    """

    omegas: np.ndarray       # (8,) ascending
    x_vecs: np.ndarray       # (8, 8)
    lam_vecs: np.ndarray     # (8, 8)
    ground: GroundSolution
    f_mat: np.ndarray | None = None
    _dcomm: np.ndarray | None = None   # cached <Lam^M [[Hbar,X^J],X^N]>_0


def jacobian(ground: GroundSolution, h0: np.ndarray, exc: ExcitationSet) -> np.ndarray:
    """A_munu = <tau_mu^dagger [Hbar, tau_nu]>_0 with Hbar = e^-T H0 e^T."""
    hbar = similarity_transform(h0, ground.t_amp, exc)
    # commutator columns applied to the reference: [Hbar, tau_nu]|0>
    cols = hbar @ exc.ref_rows.T - np.tensordot(exc.taus, hbar[:, 0], axes=(2, 0)).T
    return exc.ref_rows @ cols


def solve_eom(jac: np.ndarray, ground: GroundSolution, exc: ExcitationSet) -> EomSolution:
    omegas, x_vecs, lam_vecs = eig_general(jac)
    assert np.abs(omegas.imag).max() < 1e-10
    x_vecs = x_vecs.copy()
    lam_vecs = lam_vecs.copy()
    # Align each right vector with the determinant-space convention used by
    # the Hermitian eigensolver: the dominant component of e^T X^N |0> is
    # made real positive, so both engines realize the same superposition.
    from .ground import exp_cluster

    e_plus, _ = exp_cluster(ground.t_amp, exc)
    for n in range(8):
        full = e_plus @ (exc.ref_rows.T @ x_vecs[:, n])
        pivot = full[int(np.argmax(np.abs(full)))]
        factor = np.abs(pivot) / pivot
        x_vecs[:, n] *= factor
        lam_vecs[:, n] /= factor
    return EomSolution(
        omegas=omegas.real,
        x_vecs=x_vecs,
        lam_vecs=lam_vecs,
        ground=ground,
    )


def _excitation_operator(coeffs: np.ndarray, exc: ExcitationSet) -> np.ndarray:
    return np.tensordot(coeffs, exc.taus, axes=(0, 0))


def double_commutator_tensor(eom: EomSolution, h0: np.ndarray, exc: ExcitationSet) -> np.ndarray:
    """B[M, J, N] = <Lambda^M [[Hbar, X^J], X^N]>_0 (no scalar part on the left)."""
    if eom._dcomm is not None:
        return eom._dcomm
    hbar = similarity_transform(h0, eom.ground.t_amp, exc)
    x_ops = [_excitation_operator(eom.x_vecs[:, j], exc) for j in range(8)]
    left = eom.lam_vecs.T @ exc.ref_rows          # (8, 9): rows <0|Lambda^M
    e0 = np.zeros(hbar.shape[0])
    e0[0] = 1.0
    b = np.empty((8, 8, 8), dtype=complex)
    for j, xj in enumerate(x_ops):
        inner = hbar @ xj - xj @ hbar
        for n, xn in enumerate(x_ops):
            vec = inner @ (xn @ e0) - xn @ (inner @ e0)
            b[:, j, n] = left @ vec
    eom._dcomm = b
    return b


def f_matrix(eom: EomSolution, h0: np.ndarray, exc: ExcitationSet) -> np.ndarray:
    """F[N, I] = sum_munu <L0 [[Hbar, tau_mu], tau_nu]>_0 X^N_mu X^I_nu.

    No symmetry in (N, I) is assumed or enforced.
    """
    if eom.f_mat is not None:
        return eom.f_mat
    ground = eom.ground
    hbar = similarity_transform(h0, ground.t_amp, exc)
    row = np.zeros(hbar.shape[0])
    row[0] = 1.0
    row = row + ground.lam @ exc.ref_rows
    e0 = np.zeros(hbar.shape[0])
    e0[0] = 1.0
    g = np.empty((8, 8))
    for mu in range(8):
        inner = hbar @ exc.taus[mu] - exc.taus[mu] @ hbar
        for nu in range(8):
            vec = inner @ exc.taus[nu, :, 0] - exc.taus[nu] @ (inner @ e0)
            g[mu, nu] = row @ vec
    f = eom.x_vecs.T @ g @ eom.x_vecs
    eom.f_mat = np.real_if_close(f)
    return eom.f_mat


def y_coefficients(sup: Superposition, eom: EomSolution, h0: np.ndarray,
                   exc: ExcitationSet) -> np.ndarray:
    """Y_J = sum_{N,I} conj(C_N) C_I B[N, J, I] / (Omega_N - Omega_J - Omega_I)."""
    c = sup.coefficient_vector()
    b = double_commutator_tensor(eom, h0, exc)
    w = eom.omegas
    y = np.zeros(8, dtype=complex)
    active = [n for n in range(8) if c[n] != 0]
    for j in range(8):
        for n in active:
            for i in active:
                denom = w[n] - w[j] - w[i]
                if abs(denom) < DENOM_TOL:
                    raise NearResonantDenominator((n + 1, j + 1, i + 1), denom)
                y[j] += c[n].conjugate() * c[i] * b[n, j, i] / denom
    return y


def matrix_elements(eom: EomSolution, a: np.ndarray, exc: ExcitationSet,
                    h0: np.ndarray):
    """Transition matrix elements of operator ``a`` in the fixed vector gauge.

    Returns (me_n0, me_0n, me_mn):
      me_n0[N] = <Lambda^N Abar>_0
      me_0n[N] = <L0 [Abar, X^N]>_0 - sum_J F[N,J]/(w_J + w_N) * me_n0[J]
      me_mn[M,N] = delta_MN <L0 Abar>_0 + <Lambda^M [Abar, X^N]>_0
                   + sum_J B[M,J,N]/(w_M - w_J - w_N) * me_n0[J]

    Only products and diagonal entries are gauge-invariant.
    """
    ground = eom.ground
    abar = similarity_transform(a, ground.t_amp, exc)
    e0 = np.zeros(abar.shape[0])
    e0[0] = 1.0
    l0_row = np.zeros(abar.shape[0])
    l0_row[0] = 1.0
    l0_row = l0_row + ground.lam @ exc.ref_rows
    left = eom.lam_vecs.T @ exc.ref_rows        # (8, 9)
    x_ops = [_excitation_operator(eom.x_vecs[:, j], exc) for j in range(8)]
    w = eom.omegas

    me_n0 = left @ abar[:, 0]

    comm_cols = np.stack([(abar @ xn - xn @ abar)[:, 0] for xn in x_ops], axis=1)
    me_0n = l0_row @ comm_cols - (eom.f_mat if eom.f_mat is not None else f_matrix(eom, h0, exc)) \
        / (w[None, :] + w[:, None]) @ me_n0

    b = double_commutator_tensor(eom, h0, exc)
    me_mn = np.zeros((8, 8), dtype=complex)
    a00 = l0_row @ abar[:, 0]
    for m in range(8):
        for n in range(8):
            val = (a00 if m == n else 0.0) + left[m] @ comm_cols[:, n]
            for j in range(8):
                denom = w[m] - w[j] - w[n]
                if abs(denom) < DENOM_TOL:
                    raise NearResonantDenominator((m + 1, j + 1, n + 1), denom)
                val += b[m, j, n] / denom * me_n0[j]
            me_mn[m, n] = val
    return me_n0, me_0n, me_mn
