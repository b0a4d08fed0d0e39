import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from scfv.constitutive import (GasParams, Viscosity, energy, energy_velocity, pressure,
                               pressure_potential, total_energy)
from scfv.mesh import TorusMesh


def test_params_validation():
    with pytest.raises(ValueError, match="gamma > 1"):
        GasParams(1.0, 1.0)
    with pytest.raises(ValueError):
        GasParams(0.0, 1.4)
    with pytest.raises(ValueError):
        Viscosity(mu=0.0)
    with pytest.raises(ValueError):
        Viscosity(mu=0.1, eta=-1.0)


def test_lambda():
    assert Viscosity(0.3, 0.1, dim=3).lam == pytest.approx(0.2)
    assert Viscosity(0.2, 0.0, dim=2).lam == pytest.approx(0.1)


def test_hand_values():
    g = GasParams(2.0, 2.0)
    assert pressure(3.0, g) == 18.0
    assert pressure_potential(3.0, g) == 18.0
    # E(2, (1, 1)) = 1/2 * 2 / 2 + 2 * 4 = 8.5
    assert energy(2.0, np.array([1.0, 1.0]), g) == 8.5
    assert energy(1.0, np.zeros(2), GasParams(1.0, 1.4)) == pytest.approx(2.5)


def test_energy_branches():
    g = GasParams()
    rho = np.array([0.0, 0.0, -1.0, 1.0])
    m = np.array([[0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0]])
    e = energy(rho, m, g)
    assert e[0] == 0.0 and np.isinf(e[1]) and np.isinf(e[2]) and np.isfinite(e[3])


def test_negative_density_in_pressure():
    with pytest.raises(ValueError):
        pressure(np.array([1.0, -0.1]), GasParams())


@settings(max_examples=100, deadline=None)
@given(st.floats(0.01, 100), st.floats(1.01, 3.0), st.floats(0.1, 5))
def test_pressure_potential_identity(rho, gamma, a):
    # P'(rho) rho - P(rho) = p(rho), with P' differentiated by hand
    g = GasParams(a, gamma)
    dP = a * gamma / (gamma - 1) * rho ** (gamma - 1)
    assert dP * rho - pressure_potential(rho, g) == pytest.approx(pressure(rho, g), rel=1e-10)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.05, 10), st.floats(0.05, 10), st.floats(-5, 5), st.floats(-5, 5),
       st.floats(-5, 5), st.floats(-5, 5), st.floats(0, 1))
def test_energy_is_convex(r1, r2, m1, m2, n1, n2, t):
    g = GasParams(1.0, 1.4)
    a, b = np.array([m1, n1]), np.array([m2, n2])
    mid = energy(t * r1 + (1 - t) * r2, t * a + (1 - t) * b, g)
    assert mid <= t * energy(r1, a, g) + (1 - t) * energy(r2, b, g) + 1e-10


def test_velocity_form_and_total():
    g = GasParams()
    m = TorusMesh(2, 2)
    rho = np.full(m.shape, 2.0)
    u = np.ones((2,) + m.shape)
    assert np.allclose(energy_velocity(rho, u, g), energy(rho, rho * u, g))
    assert total_energy(m, rho, rho * u, g) == pytest.approx(float(energy(2.0, np.array([2.0, 2.0]), g)))
