import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from scfv.mesh import TorusMesh, build_mesh, cell_quadrature, gauss_rule, lift, project


def test_sizes():
    m = TorusMesh(3, 4, 2.0)
    assert m.h == 0.5
    assert m.shape == (4, 4, 4)
    assert m.cell_count == 64
    assert m.face_count == 3 * 64
    assert m.cell_volume == 0.125
    assert m.face_area == 0.25
    assert m.volume == 8.0


@pytest.mark.parametrize("kwargs", [dict(dim=1, cells_per_dim=4), dict(dim=2, cells_per_dim=1),
                                    dict(dim=2, cells_per_dim=4, domain_length=0.0)])
def test_rejects_bad_meshes(kwargs):
    with pytest.raises(ValueError):
        TorusMesh(**kwargs)


def test_lexicographic_cells_on_3x3():
    # hand enumeration: flat index 3 i + j is cell (i, j), centre ((i + 1/2) h, (j + 1/2) h)
    m = TorusMesh(2, 3)
    c = m.cell_centers().reshape(2, -1)
    for flat in range(9):
        i, j = divmod(flat, 3)
        assert np.allclose(c[:, flat], [(i + 0.5) / 3, (j + 0.5) / 3])


def test_face_orientation_and_periodic_wrap():
    m = TorusMesh(2, 3)
    # face on axis 0 of the last row wraps to row 0
    f = m.face(0 * 9 + 7)        # cell (2, 1)
    assert (f.inward, f.outward, f.axis) == (7, 1, 0)
    f = m.face(1 * 9 + 5)        # cell (1, 2), axis 1
    assert (f.inward, f.outward, f.axis) == (5, 3, 1)
    assert f.area == pytest.approx(1 / 3)


def test_every_cell_has_2d_faces_each_face_two_cells():
    m = TorusMesh(3, 3)
    count = np.zeros(m.cell_count, int)
    for f in m.faces():
        count[f.inward] += 1
        count[f.outward] += 1
    assert np.all(count == 6)
    for cell in (0, 13, 26):
        faces = m.faces_of_cell(cell)
        assert len(faces) == 6
        for face, sign in faces:
            assert cell == (face.inward if sign > 0 else face.outward)


def test_gauss_rule_integrates_degree_2n_minus_1():
    x, w = gauss_rule(3)
    for k in range(6):
        assert np.dot(w, x**k) == pytest.approx(1 / (k + 1), rel=1e-14)


def test_quadrature_weights_sum_to_one():
    m = TorusMesh(2, 4)
    assert sum(w for _, w in cell_quadrature(m, 4)) == pytest.approx(1.0, abs=1e-15)


def test_project_constant_is_exact():
    m = TorusMesh(2, 5)
    v = project(lambda x: 0.1 + 0.0 * x[0], m)
    assert np.all(v == 0.1)


def test_project_sine_matches_sinc_factor():
    # cell average of sin(2 pi x) over [x_c - h/2, x_c + h/2] is sin(2 pi x_c) sin(pi h)/(pi h)
    m = TorusMesh(2, 8)
    v = project(lambda x: np.sin(2 * np.pi * x[0]), m, order=6)
    xc = m.cell_centers()[0]
    factor = np.sin(np.pi * m.h) / (np.pi * m.h)
    assert np.allclose(v, factor * np.sin(2 * np.pi * xc), atol=1e-13)


def test_project_vector_layout():
    m = TorusMesh(2, 4)
    v = project(lambda x: np.stack([x[0], 2 * x[1]]), m)
    assert v.shape == (2, 4, 4)
    assert np.allclose(v, m.cell_centers() * np.array([1, 2]).reshape(2, 1, 1))


def test_project_rejects_nonfinite():
    with pytest.raises(ValueError):
        project(lambda x: np.full(x.shape[1:], np.inf), TorusMesh(2, 2))


def test_lift_is_periodic_step_function(rng):
    m = TorusMesh(2, 4)
    vals = rng.standard_normal(m.shape)
    f = lift(vals, m)
    assert f(np.array([0.3, 0.9])) == vals[1, 3]
    assert f(np.array([1.3, -0.1])) == vals[1, 3]
    assert np.array_equal(f(m.cell_centers()), vals)


def test_integrate():
    m = build_mesh(2, 4)
    assert m.integrate(np.ones(m.shape)) == pytest.approx(1.0)
    assert np.allclose(m.integrate(np.ones((2, 4, 4))), [1.0, 1.0])


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 3), st.integers(2, 6), st.floats(0.5, 3.0))
def test_project_preserves_integral_of_affine_periodic_parts(dim, n, length):
    # the integral of cos over whole periods vanishes; projection preserves integrals
    m = TorusMesh(dim, n, length)
    v = project(lambda x: 2.0 + np.cos(2 * np.pi * x[0] / length), m, order=4)
    assert m.integrate(v) == pytest.approx(2.0 * m.volume, rel=1e-12, abs=1e-12)
