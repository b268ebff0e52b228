"""Shared fixtures: model workspaces and cached propagations (preset A)."""

import numpy as np
import pytest

from srcc import eom, exact, ground, model, sr

S3 = 1.0 / np.sqrt(3.0)
S2 = 1.0 / np.sqrt(2.0)


class Workspace:
    """Model, spectrum, ground CC, and EOM solutions for one parameter set."""

    def __init__(self, params):
        self.params = params
        self.basis = model.build_basis()
        self.exc = model.build_excitations(self.basis, params)
        self.h0 = model.build_h0(params, self.exc, self.basis)
        self.d = model.build_dipole(params, self.exc)
        self.spectrum = exact.diagonalize(self.h0)
        self.ground = ground.solve_ground(params, self.h0, self.exc)
        self.eom = eom.solve_eom(eom.jacobian(self.ground, self.h0, self.exc),
                                 self.ground, self.exc)
        self._sr_cache = {}
        self._exact_cache = {}

    def sr_trajectory(self, sup):
        key = (sup.s, tuple(sorted(sup.c.items())))
        if key not in self._sr_cache:
            state0 = sr.init_sr(sup, self.eom, self.ground, self.h0, self.exc)
            self._sr_cache[key] = sr.propagate_sr(state0, self.params, self.h0,
                                                  self.d, self.exc)
        return self._sr_cache[key]

    def exact_trajectory(self, sup):
        key = (sup.s, tuple(sorted(sup.c.items())))
        if key not in self._exact_cache:
            psi0 = exact.initial_state(self.spectrum, s=sup.s, c=sup.c)
            self._exact_cache[key] = exact.propagate(psi0, self.params,
                                                     self.h0, self.d)
        return self._exact_cache[key]


@pytest.fixture(scope="session")
def ws_a():
    return Workspace(model.ModelParams.preset_a())


@pytest.fixture(scope="session")
def ws_b():
    return Workspace(model.ModelParams.preset_b())


@pytest.fixture(scope="session")
def qs1():
    return eom.Superposition(s=S3, c={1: S3, 2: S3})


@pytest.fixture(scope="session")
def qs2():
    return eom.Superposition(c={7: S2, 8: 1j * S2})


@pytest.fixture(scope="session")
def qs3():
    return eom.Superposition(s=0.5, c={3: 0.5, 5: S2})
