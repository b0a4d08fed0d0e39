import numpy as np
import pytest

from scfv.constitutive import GasParams, Viscosity
from scfv.mesh import TorusMesh
from scfv.solver import SchemeParams, init_state

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def gas():
    return GasParams(a=1.0, gamma=1.4)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def smooth_data():
    """Smooth 2D data: density Fourier bump and a velocity Fourier mode."""
    two_pi = 2 * np.pi

    def rho0(x):
        return 1.0 + 0.2 * np.sin(two_pi * x[0]) * np.sin(two_pi * x[1])

    def u0(x):
        return 0.5 * np.stack(np.broadcast_arrays(np.sin(two_pi * x[1]), np.cos(two_pi * x[0])))

    def m0(x):
        return rho0(x) * u0(x)

    return rho0, m0


def smooth_setup(n=16, mu=0.1, cfl=0.1, gas=None):
    gas = gas or GasParams(1.0, 1.4)
    mesh = TorusMesh(2, n)
    rho0, m0 = smooth_data()
    return mesh, SchemeParams.for_mesh(mesh, cfl), Viscosity(mu, 0.0, 2), init_state(rho0, m0, mesh, gas), gas
