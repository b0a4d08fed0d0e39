import numpy as np
import pytest

from conftest import smooth_data, smooth_setup
from scfv.consistency import (ScalarTestFunction, consistency_residual, separable_scalar,
                              separable_vector)
from scfv.constitutive import GasParams, Viscosity
from scfv.mesh import TorusMesh
from scfv.solver import FluidState, SchemeParams, run

T = 0.05


def _constant_trajectory(u=(0.0, 0.0)):
    mesh = TorusMesh(2, 4)
    rho = np.full(mesh.shape, 1.2)
    mom = np.stack([np.full(mesh.shape, 1.2 * c) for c in u])
    s0 = FluidState(mesh, rho, mom)
    params = SchemeParams.for_mesh(mesh)
    return run(s0, T, params, Viscosity(0.1), GasParams())[0]


def test_test_function_derivatives():
    phi = separable_scalar(T, (1, 2), 0.3, 2.0)
    x = np.array([0.1, 0.7])
    t = 0.01
    d = 1e-6
    for a in range(2):
        e = np.eye(2)[a] * d
        fd = (phi.value(t, x + e) - phi.value(t, x - e)) / (2 * d)
        assert phi.grad(t, x)[a] == pytest.approx(fd, rel=1e-6)
    assert phi.value(T, x) == 0.0


def test_vector_test_function_layout():
    b = separable_vector(T, [(1, 0), (0, 1)], [0.1, 0.2])
    x = np.zeros((2, 3, 3))
    assert b.value(0.0, x).shape == (2, 3, 3)
    assert b.grad(0.0, x).shape == (2, 2, 3, 3)


def test_requires_vanishing_at_final_time():
    traj = _constant_trajectory()
    bad = ScalarTestFunction(lambda t, x: 1.0 + 0 * x[0], lambda t, x: 0 * x)
    good = separable_vector(T, [(1, 0), (0, 1)])
    with pytest.raises(ValueError, match="vanish"):
        consistency_residual(traj, bad, good, GasParams(), Viscosity(0.1))


def test_constant_states_have_zero_defects():
    # constant-in-x test functions: every flux and pressure term drops out
    traj = _constant_trajectory((0.3, -0.2))
    phi = separable_scalar(T, (0, 0), 0.4)
    bphi = separable_vector(T, [(0, 0), (0, 0)], [0.2, 1.0])
    rep = consistency_residual(traj, phi, bphi, GasParams(), Viscosity(0.1))
    assert abs(rep.e1) < 1e-14 and abs(rep.e2) < 1e-14


def test_defects_shrink_under_refinement():
    phi = separable_scalar(T, (1, 1), 0.3)
    bphi = separable_vector(T, [(1, 0), (0, 1)], [0.2, 0.5])
    rho0, m0 = smooth_data()
    errs = []
    for n in (4, 8, 16):
        mesh, params, visc, s0, gas = smooth_setup(n)
        traj, _ = run(s0, T, params, visc, gas)
        rep = consistency_residual(traj, phi, bphi, gas, visc, rho0, m0)
        errs.append((abs(rep.e1), abs(rep.e2)))
    assert errs[2][0] < errs[1][0] < errs[0][0]
    assert errs[2][1] < errs[1][1] < errs[0][1]
