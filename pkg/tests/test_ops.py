import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from scfv import ops
from scfv.mesh import TorusMesh


def _fields(dim, n):
    shape = (n,) * dim
    return arrays(np.float64, shape, elements=st.floats(-10, 10))


def test_single_face_avg_and_jump():
    m = TorusMesh(2, 3)
    r = np.arange(9.0).reshape(3, 3)
    f = m.face(1 * 9 + 5)   # between cells 5 and 3 (wrap along axis 1)
    assert ops.avg(m, r, f) == 4.0
    assert ops.jump(m, r, f) == -2.0


def test_face_arrays_agree_with_single_face():
    m = TorusMesh(3, 3)
    r = np.random.default_rng(0).standard_normal(m.shape)
    fa, fj = ops.face_avg(m, r), ops.face_jump(m, r)
    for f in m.faces():
        idx = (f.axis,) + np.unravel_index(f.inward, m.shape)
        assert fa[idx] == ops.avg(m, r, f)
        assert fj[idx] == ops.jump(m, r, f)


def test_grad_of_sine_is_central_difference():
    # (r_{i+1} - r_{i-1}) / (2h) on cell averages of sin: exact formula
    m = TorusMesh(2, 8)
    x = m.cell_centers()
    s = np.sin(np.pi * m.h) / (np.pi * m.h)
    r = s * np.sin(2 * np.pi * x[0])
    g = ops.grad_h(m, r)
    expect = s * np.cos(2 * np.pi * x[0]) * np.sin(2 * np.pi * m.h) / m.h
    assert np.allclose(g[0], expect, atol=1e-13)
    assert np.allclose(g[1], 0.0, atol=1e-13)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_laplace_eigenvalues(k):
    m = TorusMesh(2, 8)
    x = m.cell_centers()
    r = np.cos(2 * np.pi * k * x[0]) * np.cos(2 * np.pi * x[1])
    lam = -4 / m.h**2 * (np.sin(np.pi * k * m.h) ** 2 + np.sin(np.pi * m.h) ** 2)
    assert np.allclose(ops.laplace_h(m, r), lam * r, atol=1e-10)


def test_div_of_constant_field_vanishes():
    m = TorusMesh(3, 4)
    v = np.ones((3,) + m.shape) * np.array([1.0, -2.0, 3.0]).reshape(3, 1, 1, 1)
    assert np.all(ops.div_h(m, v) == 0.0)


def test_div_is_minus_adjoint_of_grad(rng):
    m = TorusMesh(2, 5)
    r = rng.standard_normal(m.shape)
    v = rng.standard_normal((2,) + m.shape)
    assert ops.inner(m, ops.grad_h(m, r), v) == pytest.approx(-ops.inner(m, r, ops.div_h(m, v)), abs=1e-12)


def test_norms():
    m = TorusMesh(2, 2)
    r = np.array([[1.0, -2.0], [0.0, 3.0]])
    assert ops.lp_norm(m, r, 1) == pytest.approx(1.5)
    assert ops.lp_norm(m, r, 2) == pytest.approx(np.sqrt(14 / 4))
    assert ops.lp_norm(m, r, np.inf) == 3.0
    v = np.stack([np.full((2, 2), 3.0), np.full((2, 2), 4.0)])
    assert ops.lp_norm(m, v, np.inf) == 5.0
    with pytest.raises(ValueError):
        ops.lp_norm(m, r, 0.5)


def test_dissipation_seminorm_by_hand():
    # 2 x 2 torus: every face jump of the checkerboard is +-2, 8 faces, |sigma| h = h^2
    m = TorusMesh(2, 2)
    r = np.array([[1.0, -1.0], [-1.0, 1.0]])
    assert ops.dissipation_seminorm(m, r) == pytest.approx(8 * m.h**2 * (2 / m.h) ** 2)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([2, 3]), st.data())
def test_duality_property(dim, data):
    m = TorusMesh(dim, 4)
    r = data.draw(_fields(dim, 4))
    s = data.draw(_fields(dim, 4))
    lhs = m.cell_volume * np.sum(ops.laplace_h(m, r) * s)
    rhs = m.face_area * np.sum(ops.face_jump(m, r) * ops.face_jump(m, s)) / m.h
    assert abs(lhs + rhs) <= 1e-12 * max(1.0, abs(rhs))


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([2, 3]), st.data())
def test_totals_vanish_property(dim, data):
    m = TorusMesh(dim, 4)
    r = data.draw(_fields(dim, 4))
    assert np.all(np.abs(m.integrate(ops.grad_h(m, r))) <= 1e-12)
    assert abs(m.integrate(ops.laplace_h(m, r))) <= 1e-10
