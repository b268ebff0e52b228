import numpy as np
import pytest
import scipy.linalg

from srcc import linalg
from srcc.errors import DefectiveMatrix, NonFiniteState, NonHermitianInput
from srcc.units import FS_TO_AU


def _random_hermitian(rng, n=9):
    m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (m + m.conj().T)


def test_is_hermitian():
    rng = np.random.default_rng(7)
    h = _random_hermitian(rng)
    assert linalg.is_hermitian(h)
    assert not linalg.is_hermitian(h + 1e-6 * 1j * np.eye(9))


def test_eig_hermitian_reconstruction_and_order():
    rng = np.random.default_rng(11)
    h = _random_hermitian(rng)
    w, v = linalg.eig_hermitian(h)
    assert np.all(np.diff(w) >= 0)
    assert np.abs(v @ np.diag(w) @ v.conj().T - h).max() < 1e-12
    # phase convention: largest-magnitude entry of every column real positive
    for k in range(9):
        pivot = v[np.argmax(np.abs(v[:, k])), k]
        assert abs(pivot.imag) < 1e-14 and pivot.real > 0


def test_eig_hermitian_rejects_nonhermitian():
    with pytest.raises(NonHermitianInput):
        linalg.eig_hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_eig_general_biorthonormal():
    rng = np.random.default_rng(3)
    m = rng.normal(size=(8, 8))
    w, vr, vl = linalg.eig_general(m)
    assert np.all(np.diff(w.real) >= -1e-12)
    assert np.abs(vl.T @ vr - np.eye(8)).max() < 1e-10
    assert np.allclose(np.linalg.norm(vr, axis=0), 1.0, atol=1e-12)
    for k in range(8):
        assert np.abs(m @ vr[:, k] - w[k] * vr[:, k]).max() < 1e-10


def test_eig_general_symmetric_limit():
    # symmetric input: left and right vectors coincide
    rng = np.random.default_rng(5)
    m = rng.normal(size=(6, 6))
    m = m + m.T
    w, vr, vl = linalg.eig_general(m)
    assert np.abs(vr - vl).max() < 1e-9


def test_eig_general_defective():
    with pytest.raises(DefectiveMatrix):
        linalg.eig_general(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_expm_matches_scipy():
    rng = np.random.default_rng(13)
    for _ in range(3):
        m = rng.normal(size=(9, 9)) + 1j * rng.normal(size=(9, 9))
        assert np.abs(linalg.expm(m) - scipy.linalg.expm(m)).max() < 1e-12


def test_expm_nilpotent_exact():
    # strictly upper-triangular: series terminates, inverse is the negation
    n = np.triu(np.ones((4, 4)), k=1)
    e_plus = linalg.expm(n)
    e_minus = linalg.expm(-n)
    assert np.abs(e_plus @ e_minus - np.eye(4)).max() < 1e-15


def test_expm_antihermitian_unitary():
    rng = np.random.default_rng(17)
    h = _random_hermitian(rng)
    u = linalg.expm(-1j * 0.3 * h)
    assert np.abs(u @ u.conj().T - np.eye(9)).max() < 1e-12


def test_midpoint_scalar_phasor():
    # y' = -i w y over 50 fs with dt = 1e-3 fs: |y| stays 1 within 1e-6 and
    # the phase error is second order in dt
    omega = 1.0 / FS_TO_AU   # 1 rad/fs in atomic units

    def run(n_steps):
        dt = 50.0 * FS_TO_AU / n_steps
        y = np.array([1.0 + 0.0j])
        t = 0.0
        for _ in range(n_steps):
            y = linalg.midpoint_step(lambda tt, yy: -1j * omega * yy, y, t, dt)
            t += dt
        phase_err = np.angle(y[0] * np.exp(1j * omega * t))
        return abs(abs(y[0]) - 1.0), abs(phase_err)

    norm_err, phase_err = run(50000)
    assert norm_err < 1e-6
    _, phase_err_half = run(100000)
    assert 3.0 < phase_err / phase_err_half < 5.0


def test_midpoint_nonfinite():
    with pytest.raises(NonFiniteState):
        linalg.midpoint_step(lambda t, y: y * np.inf, np.ones(2, dtype=complex),
                             0.0, 0.1)
