"""Three-level/three-electron model: determinant basis, excitation operators,
Hamiltonian, dipole, level populations and the driving pulse.

Spin orbitals are ordered (j_up, j_dn, i_up, i_dn, a_up, a_dn), indices 0..5.
Determinants are 6-bit occupation masks in that order; a determinant is the
creation string applied in ascending orbital index, and every fermionic sign
derives from that convention.  The basis is the M_s=+1/2 sector (two up, one
down electron): nine determinants, reference first.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import units

N_SPIN_ORBITALS = 6
N_DETS = 9
UP_ORBITALS = frozenset({0, 2, 4})
ORBITAL_LEVEL = (0, 0, 1, 1, 2, 2)  # spin orbital -> level (j=0, i=1, a=2)
LEVEL_NAMES = ("j", "i", "a")

REFERENCE_MASK = 0b000111  # j_up, j_dn, i_up

# Excitation labels mu=1..8 as (occupied -> virtual) spin-orbital moves.
# The enumeration is pinned by the reference eigenstate/amplitude tables:
# the dominant-configuration assignments and amplitude ordering only
# reproduce with this mixed singles/doubles order.
CONFIG_MOVES = (
    ((2, 4),),            # 1: i_up -> a_up
    ((0, 4),),            # 2: j_up -> a_up
    ((1, 3),),            # 3: j_dn -> i_dn
    ((2, 4), (1, 3)),     # 4: double
    ((0, 4), (1, 3)),     # 5: double
    ((1, 5),),            # 6: j_dn -> a_dn
    ((2, 4), (1, 5)),     # 7: double
    ((0, 4), (1, 5)),     # 8: double
)


@dataclass(frozen=True)
class ModelParams:
    """Model and run parameters. Energies in eV, times in fs (as configured);
    consumers convert to atomic units through the properties below."""

    delta_eps: float = 1.0
    b: float = 0.1
    w0: float = 0.2
    u0: float = 0.2
    d0: float = 0.5
    f0: float = 0.04          # field strength, already in a.u.
    t_pulse: float = 5.0
    t_final: float = 50.0
    n_steps: int = 50000
    alpha: float = 0.0        # regularization strength in eV; 0 disables

    def __post_init__(self):
        if self.delta_eps <= 0:
            raise ValueError("delta_eps must be positive")
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")
        if self.t_final <= 0:
            raise ValueError("t_final must be positive")
        if self.t_pulse < 0:
            raise ValueError("t_pulse must be non-negative")
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")

    @classmethod
    def preset_a(cls, **overrides) -> "ModelParams":
        return cls(**overrides)

    @classmethod
    def preset_b(cls, **overrides) -> "ModelParams":
        base = dict(b=0.25, w0=0.5, u0=0.5)
        base.update(overrides)
        return cls(**base)

    @property
    def alpha_ha(self) -> float:
        return units.ev_to_hartree(self.alpha)

    @property
    def t_pulse_au(self) -> float:
        return units.fs_to_au(self.t_pulse)

    @property
    def t_final_au(self) -> float:
        return units.fs_to_au(self.t_final)

    @property
    def dt_au(self) -> float:
        return self.t_final_au / self.n_steps

    def level_energies_ha(self) -> np.ndarray:
        de = units.ev_to_hartree(self.delta_eps)
        return np.array([0.0, de, 2.0 * de])


@dataclass(frozen=True)
class Determinant:
    """Occupation bitmask over the six spin orbitals."""

    mask: int

    def __post_init__(self):
        occ = self.occupied()
        if len(occ) != 3:
            raise ValueError("determinant must hold exactly three electrons")
        n_up = sum(1 for p in occ if p in UP_ORBITALS)
        if n_up != 2:
            raise ValueError("determinant must lie in the M_s=+1/2 sector")

    def occupied(self) -> tuple[int, ...]:
        return tuple(p for p in range(N_SPIN_ORBITALS) if self.mask >> p & 1)

    def excitation_level(self) -> int:
        """Number of electrons moved relative to the reference."""
        return bin(self.mask & ~REFERENCE_MASK).count("1")


@dataclass(frozen=True)
class Basis:
    """The nine M_s=+1/2 determinants; index 0 is the reference."""

    determinants: tuple[Determinant, ...]
    index: dict = field(repr=False)

    def __len__(self) -> int:
        return len(self.determinants)


@dataclass(frozen=True)
class ExcitationSet:
    """Matrices tau_mu (mu=1..8, stored 0-based) in the basis representation,
    plus cached reference projections used throughout the CC modules."""

    taus: np.ndarray          # (8, 9, 9)
    labels: tuple             # move tuples, one per mu
    ref_rows: np.ndarray      # (8, 9): row mu is (tau_mu |0>)^dagger
    deltas: np.ndarray        # (8,) orbital-energy differences in hartree


def _apply_creation(p: int, mask: int):
    if mask >> p & 1:
        return 0, 0
    sign = -1 if bin(mask & ((1 << p) - 1)).count("1") % 2 else 1
    return sign, mask | (1 << p)


def _apply_annihilation(p: int, mask: int):
    if not (mask >> p & 1):
        return 0, 0
    sign = -1 if bin(mask & ((1 << p) - 1)).count("1") % 2 else 1
    return sign, mask & ~(1 << p)


def apply_excitation(moves, mask: int):
    """Apply a product of (occupied -> virtual) moves; returns (sign, mask),
    sign 0 when the string annihilates the state."""
    sign = 1
    for occ, virt in moves:
        s, mask = _apply_annihilation(occ, mask)
        if s == 0:
            return 0, 0
        sign *= s
        s, mask = _apply_creation(virt, mask)
        if s == 0:
            return 0, 0
        sign *= s
    return sign, mask


def build_basis() -> Basis:
    masks = [REFERENCE_MASK]
    for moves in CONFIG_MOVES:
        sign, mask = apply_excitation(moves, REFERENCE_MASK)
        assert sign != 0
        masks.append(mask)
    # sanity: these are exactly the 2-up/1-down occupations of 6 spin orbitals
    sector = {
        sum(1 << p for p in occ)
        for occ in itertools.combinations(range(N_SPIN_ORBITALS), 3)
        if sum(1 for p in occ if p in UP_ORBITALS) == 2
    }
    assert set(masks) == sector and len(masks) == N_DETS
    dets = tuple(Determinant(m) for m in masks)
    return Basis(determinants=dets, index={m: i for i, m in enumerate(masks)})


def build_excitations(basis: Basis, params: ModelParams | None = None) -> ExcitationSet:
    params = params or ModelParams()
    index = basis.index
    taus = np.zeros((8, N_DETS, N_DETS))
    for mu, moves in enumerate(CONFIG_MOVES):
        for col, det in enumerate(basis.determinants):
            sign, mask = apply_excitation(moves, det.mask)
            if sign != 0 and mask in index:
                taus[mu, index[mask], col] = sign
    eps = params.level_energies_ha()
    deltas = np.array([
        sum(eps[ORBITAL_LEVEL[v]] - eps[ORBITAL_LEVEL[o]] for o, v in moves)
        for moves in CONFIG_MOVES
    ])
    return ExcitationSet(
        taus=taus,
        labels=CONFIG_MOVES,
        ref_rows=taus[:, :, 0].copy(),
        deltas=deltas,
    )


def _single_mask(exc: ExcitationSet) -> np.ndarray:
    return np.array([len(moves) == 1 for moves in exc.labels])


def build_h0(params: ModelParams, exc: ExcitationSet, basis: Basis | None = None) -> np.ndarray:
    """Unperturbed Hamiltonian: orbital energies, on-site pair repulsion
    (U_j=0, U_i=U_a=u0), one-body hopping b over the single excitations,
    and pair terms w0 over products of excitation operators."""
    basis = basis or build_basis()
    eps = params.level_energies_ha()
    u0 = units.ev_to_hartree(params.u0)
    h = np.zeros((N_DETS, N_DETS))
    for k, det in enumerate(basis.determinants):
        mask = det.mask
        e = sum(eps[ORBITAL_LEVEL[p]] for p in det.occupied())
        # doubly occupied i or a level pays the on-site term
        for p_up, p_dn in ((2, 3), (4, 5)):
            if (mask >> p_up & 1) and (mask >> p_dn & 1):
                e += u0
        h[k, k] = e

    b = units.ev_to_hartree(params.b)
    hop = exc.taus[_single_mask(exc)].sum(axis=0)
    h += b * (hop + hop.T)

    w0 = units.ev_to_hartree(params.w0)
    pair = np.zeros((N_DETS, N_DETS))
    for mu in range(8):
        for nu in range(mu):
            pair += exc.taus[mu] @ exc.taus[nu]
    h += w0 * (pair + pair.T)
    return h


def build_dipole(params: ModelParams, exc: ExcitationSet) -> np.ndarray:
    """Dipole operator: d0 times the symmetrized one-body transition sum."""
    hop = exc.taus[_single_mask(exc)].sum(axis=0)
    return params.d0 * (hop + hop.T)


def build_level_population(level, basis: Basis | None = None) -> np.ndarray:
    """Diagonal number operator of a level ('j', 'i', or 'a', or 0..2)."""
    if isinstance(level, str):
        level = LEVEL_NAMES.index(level)
    if level not in (0, 1, 2):
        raise ValueError(f"unknown level {level!r}")
    basis = basis or build_basis()
    diag = [
        sum(1 for p in det.occupied() if ORBITAL_LEVEL[p] == level)
        for det in basis.determinants
    ]
    return np.diag(np.asarray(diag, dtype=float))


def pulse(t_au: float, params: ModelParams) -> float:
    """Rectangular pulse: f0 inside (0, t_pulse), zero outside."""
    return params.f0 if 0.0 < t_au < params.t_pulse_au else 0.0


def hamiltonian_at(t_au: float, params: ModelParams, h0: np.ndarray, d: np.ndarray) -> np.ndarray:
    f = pulse(t_au, params)
    return h0 if f == 0.0 else h0 - f * d
