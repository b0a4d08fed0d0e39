"""Discrete calculus on piecewise-constant fields over a :class:`TorusMesh`.

All face quantities are oriented along the fixed face normal ``+e_a``:
``face_jump(r)[a, K] = r[K + e_a] - r[K]``.  Cell operators sum the ``2d``
faces of a cell with the outward normal of that cell, so e.g. ``grad_h``
reduces to the central difference over ``2h``.
"""

from __future__ import annotations

import numpy as np

from .mesh import Face, TorusMesh

__all__ = [
    "avg",
    "jump",
    "face_avg",
    "face_jump",
    "grad_h",
    "div_h",
    "laplace_h",
    "grad_D",
    "lp_norm",
    "dissipation_seminorm",
    "inner",
]


def _flat(mesh: TorusMesh, r):
    return np.asarray(r, dtype=float).reshape(-1, mesh.cell_count) if np.ndim(r) > mesh.dim \
        else np.asarray(r, dtype=float).reshape(mesh.cell_count)


def avg(mesh: TorusMesh, r, face: Face):
    """Average of the two traces of ``r`` on one face."""
    v = _flat(mesh, r)
    return 0.5 * (v[..., face.inward] + v[..., face.outward])


def jump(mesh: TorusMesh, r, face: Face):
    """``r_out - r_in`` on one face, relative to its ``+e_axis`` normal."""
    v = _flat(mesh, r)
    return v[..., face.outward] - v[..., face.inward]


def _shift(mesh: TorusMesh, r: np.ndarray, axis: int, by: int) -> np.ndarray:
    # value of r at K + by*e_axis, stored at K; leading (component) axes untouched
    lead = r.ndim - mesh.dim
    return np.roll(r, -by, axis=lead + axis)


def face_avg(mesh: TorusMesh, r) -> np.ndarray:
    """Face averages for every face; shape ``(d, *r.shape)``."""
    r = np.asarray(r, dtype=float)
    return np.stack([0.5 * (r + _shift(mesh, r, a, 1)) for a in range(mesh.dim)])


def face_jump(mesh: TorusMesh, r) -> np.ndarray:
    """Face jumps for every face; shape ``(d, *r.shape)``."""
    r = np.asarray(r, dtype=float)
    return np.stack([_shift(mesh, r, a, 1) - r for a in range(mesh.dim)])


def face_divergence(mesh: TorusMesh, flux: np.ndarray) -> np.ndarray:
    """Net outflow per unit volume of a normal face flux, ``(1/|K|) sum |sigma| F n_out``.

    ``flux[a, ...]`` is the flux through face ``(a, K)`` along ``+e_a``.  Each
    face value enters exactly two cells with opposite signs.
    """
    out = None
    for a in range(mesh.dim):
        fa = flux[a]
        term = fa - _shift(mesh, fa, a, -1)
        out = term if out is None else out + term
    return out / mesh.h


def grad_h(mesh: TorusMesh, r) -> np.ndarray:
    """Cell gradient from face averages; shape ``(d, *shape)``."""
    r = mesh.check_scalar(r)
    fa = face_avg(mesh, r)
    return np.stack([(fa[a] - _shift(mesh, fa[a], a, -1)) / mesh.h for a in range(mesh.dim)])


def div_h(mesh: TorusMesh, v) -> np.ndarray:
    """Cell divergence of a vector field from face averages of its normal components."""
    v = mesh.check_vector(v)
    normal = np.stack([0.5 * (v[a] + _shift(mesh, v[a], a, 1)) for a in range(mesh.dim)])
    return face_divergence(mesh, normal)


def laplace_h(mesh: TorusMesh, r) -> np.ndarray:
    """Discrete Laplacian; applies componentwise to vector fields."""
    r = np.asarray(r, dtype=float)
    jumps = face_jump(mesh, r) / mesh.h
    return face_divergence(mesh, jumps)


def grad_D(mesh: TorusMesh, r) -> np.ndarray:
    """Face difference quotient ``[[r]]/h`` along each face normal.

    Returns the normal magnitude per face, shape ``(d, *r.shape)``; the full
    face vector of face ``(a, K)`` is this value times ``e_a``.
    """
    return face_jump(mesh, r) / mesh.h


def lp_norm(mesh: TorusMesh, r, p: float = 2.0) -> float:
    """Volume-weighted discrete L^p norm; vector fields use the pointwise Euclidean norm."""
    r = np.asarray(r, dtype=float)
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    mag = np.sqrt(np.sum(r**2, axis=0)) if r.ndim > mesh.dim else np.abs(r)
    if np.isinf(p):
        return float(mag.max())
    return float((mesh.cell_volume * np.sum(mag**p)) ** (1.0 / p))


def dissipation_seminorm(mesh: TorusMesh, r) -> float:
    """``sum_sigma |sigma| h |(grad_D r)_sigma|^2``, summed over components."""
    g = grad_D(mesh, r)
    return float(mesh.face_area * mesh.h * np.sum(g**2))


def inner(mesh: TorusMesh, r, s) -> float:
    """Volume-weighted inner product ``sum_K |K| r_K . s_K``."""
    return float(mesh.cell_volume * np.sum(np.asarray(r) * np.asarray(s)))
