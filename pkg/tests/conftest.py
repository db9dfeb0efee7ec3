import math

import pytest
from hypothesis import settings

from halflap import (
    EnergyFunctional,
    assemble_mass,
    assemble_stiffness,
    make_critical_example,
    make_grid,
    make_subcritical_example,
    smallest_eigenpairs,
)

settings.register_profile("default", deadline=None, max_examples=50)
settings.load_profile("default")


class Setup:
    def __init__(self, a, b, n):
        self.grid = make_grid(a, b, n)
        self.A = assemble_stiffness(self.grid)
        self.M = assemble_mass(self.grid)
        self.eig = smallest_eigenpairs(self.A, self.M, 1)
        self.lam = self.eig.lambda1_X
        self.mu = self.lam / (4 * math.pi)

    def ex1(self, q=1.5):
        return EnergyFunctional(self.A, make_subcritical_example(self.mu, q))

    def ex2(self, alpha0=1.0):
        return EnergyFunctional(self.A, make_critical_example(self.mu, alpha0))


@pytest.fixture(scope="session")
def unit256():
    return Setup(0.0, 1.0, 256)


@pytest.fixture(scope="session")
def sym256():
    return Setup(-1.0, 1.0, 256)


@pytest.fixture(scope="session")
def mp_ex1(unit256):
    from halflap import mountain_pass

    E = unit256.ex1()
    return E, mountain_pass(E, direction=unit256.eig.eigenfunction)
