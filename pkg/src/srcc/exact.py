"""Numerically exact unitary reference: diagonalization of the unperturbed
Hamiltonian, mid-step exponential propagation, observables, eigenstate
probabilities and coherences."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import model
from .errors import DimensionMismatch, EmptySuperposition, IndexOutOfRange, NonFiniteState
from .linalg import eig_hermitian, expm


@dataclass(frozen=True)
class Spectrum:
    """Eigenstates of H0, ascending; the column index is the wavefunction
    number used everywhere else."""

    energies: np.ndarray   # (9,)
    states: np.ndarray     # (9, 9) eigenvector columns


@dataclass(frozen=True)
class WaveTrajectory:
    times: np.ndarray      # (n+1,) uniform grid, a.u.
    states: np.ndarray     # (n+1, 9) complex


@dataclass(frozen=True)
class TimeSeries:
    times: np.ndarray
    values: np.ndarray

    @property
    def times_fs(self) -> np.ndarray:
        from . import units

        return self.times / units.FS_TO_AU


def diagonalize(h0: np.ndarray) -> Spectrum:
    energies, states = eig_hermitian(h0)
    return Spectrum(energies=energies, states=states)


def initial_state(spec: Spectrum, s: complex = 0.0, c: dict | None = None) -> np.ndarray:
    """Superposition s*Psi_0 + sum_N c[N]*Psi_N, renormalized (with a warning)
    when the requested coefficients are off unit norm by more than 1e-12."""
    c = c or {}
    for n in c:
        if not 1 <= n <= 8:
            raise IndexOutOfRange(f"excited-state index {n} outside 1..8")
    norm2 = abs(s) ** 2 + sum(abs(v) ** 2 for v in c.values())
    if norm2 == 0:
        raise EmptySuperposition("all superposition coefficients are zero")
    psi = s * spec.states[:, 0].astype(complex)
    for n, coeff in c.items():
        psi = psi + coeff * spec.states[:, n]
    if abs(norm2 - 1.0) > 1e-12:
        warnings.warn(
            f"superposition norm {np.sqrt(norm2):.12f} != 1; renormalizing",
            stacklevel=2,
        )
        psi = psi / np.sqrt(norm2)
    return psi


def propagate(psi0: np.ndarray, params: model.ModelParams, h0: np.ndarray, d: np.ndarray) -> WaveTrajectory:
    """Unitary propagation psi(t+dt) = exp(-i dt H(t+dt/2)) psi(t) on the
    uniform grid defined by params. Propagators are cached per field value
    (the rectangular pulse only ever produces two distinct Hamiltonians)."""
    dt = params.dt_au
    times = np.arange(params.n_steps + 1) * dt
    states = np.empty((params.n_steps + 1, h0.shape[0]), dtype=complex)
    states[0] = psi0
    propagators: dict[float, np.ndarray] = {}
    psi = psi0.astype(complex)
    for k in range(params.n_steps):
        f = model.pulse(times[k] + 0.5 * dt, params)
        u = propagators.get(f)
        if u is None:
            u = expm(-1j * dt * (h0 - f * d))
            propagators[f] = u
        psi = u @ psi
        states[k + 1] = psi
    if not np.all(np.isfinite(states.view(float))):
        raise NonFiniteState("exact propagation produced non-finite amplitudes")
    return WaveTrajectory(times=times, states=states)


def observable(traj: WaveTrajectory, a: np.ndarray) -> TimeSeries:
    if a.shape != (traj.states.shape[1],) * 2:
        raise DimensionMismatch(f"operator shape {a.shape} does not match trajectory")
    values = np.einsum("ki,ij,kj->k", traj.states.conj(), a, traj.states)
    if np.abs(a - a.conj().T).max() <= 1e-12:
        assert np.abs(values.imag).max() <= 1e-10
        values = values.real
    return TimeSeries(times=traj.times, values=values)


def coherence_exact(traj: WaveTrajectory, spec: Spectrum, i: int, j: int) -> TimeSeries:
    """p_ij(t) = conj(C_i(t)) * C_j(t) with C_k(t) = <Psi_k|Psi(t)>."""
    n = spec.states.shape[1]
    if not (0 <= i < n and 0 <= j < n):
        raise IndexOutOfRange(f"state indices ({i}, {j}) outside 0..{n - 1}")
    ci = traj.states @ spec.states[:, i].conj()
    cj = traj.states @ spec.states[:, j].conj()
    return TimeSeries(times=traj.times, values=ci.conj() * cj)
