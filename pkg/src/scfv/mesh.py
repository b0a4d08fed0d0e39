"""Uniform periodic cuboid meshes of the flat torus and cell-average projection.

Scalar fields live in arrays of shape ``mesh.shape`` (one value per cell),
vector fields in arrays of shape ``(d, *mesh.shape)``.  Cells are indexed
lexicographically (C order), so the flat index of cell ``(i1, ..., id)`` is
``np.ravel_multi_index((i1, ..., id), mesh.shape)``.

Faces are indexed by ``(axis, cell)``: face ``(a, K)`` separates cell ``K``
(the inward cell) from ``K + e_a`` (the outward cell) and carries the fixed
unit normal ``+e_a``.  Face-based data are therefore stored with the same
layout as vector fields, ``(d, *mesh.shape)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import product
from typing import Callable, NamedTuple

import numpy as np

__all__ = ["Face", "TorusMesh", "build_mesh", "gauss_rule", "project", "lift"]


class Face(NamedTuple):
    index: int
    inward: int
    outward: int
    axis: int
    area: float


@dataclass(frozen=True)
class TorusMesh:
    dim: int
    cells_per_dim: int
    domain_length: float = 1.0

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim}")
        if int(self.cells_per_dim) != self.cells_per_dim or self.cells_per_dim < 2:
            raise ValueError(
                f"cells_per_dim must be an integer >= 2, got {self.cells_per_dim}"
            )
        if not (np.isfinite(self.domain_length) and self.domain_length > 0):
            raise ValueError(f"domain_length must be positive, got {self.domain_length}")

    @property
    def h(self) -> float:
        return self.domain_length / self.cells_per_dim

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.cells_per_dim,) * self.dim

    @property
    def cell_count(self) -> int:
        return self.cells_per_dim**self.dim

    @property
    def face_count(self) -> int:
        return self.dim * self.cell_count

    @property
    def cell_volume(self) -> float:
        return self.h**self.dim

    @property
    def face_area(self) -> float:
        return self.h ** (self.dim - 1)

    @property
    def volume(self) -> float:
        return self.domain_length**self.dim

    def cell_centers(self) -> np.ndarray:
        """Cell centres, shape ``(d, *shape)``."""
        c = (np.arange(self.cells_per_dim) + 0.5) * self.h
        return np.array(np.meshgrid(*([c] * self.dim), indexing="ij"))

    def cell_lower_corners(self) -> np.ndarray:
        c = np.arange(self.cells_per_dim) * self.h
        return np.array(np.meshgrid(*([c] * self.dim), indexing="ij"))

    @cached_property
    def _neighbors(self) -> np.ndarray:
        # _neighbors[a, s] = flat index of K + (2s - 1) e_a, for every flat K
        idx = np.arange(self.cell_count).reshape(self.shape)
        out = np.empty((self.dim, 2, self.cell_count), dtype=np.intp)
        for a in range(self.dim):
            out[a, 0] = np.roll(idx, 1, axis=a).ravel()
            out[a, 1] = np.roll(idx, -1, axis=a).ravel()
        return out

    def neighbor(self, axis: int, direction: int) -> np.ndarray:
        """Flat index of ``K + direction * e_axis`` for every flat cell ``K``."""
        if direction not in (-1, 1):
            raise ValueError("direction must be -1 or +1")
        return self._neighbors[axis, (direction + 1) // 2]

    def face(self, index: int) -> Face:
        if not 0 <= index < self.face_count:
            raise IndexError(f"face index {index} out of range")
        axis, cell = divmod(index, self.cell_count)
        return Face(index, cell, int(self.neighbor(axis, 1)[cell]), axis, self.face_area)

    def faces(self):
        """Iterate over all faces in the fixed (axis, cell) order."""
        for i in range(self.face_count):
            yield self.face(i)

    def faces_of_cell(self, cell: int) -> list[tuple[Face, int]]:
        """The ``2d`` faces of a cell paired with the sign of the outward normal."""
        out = []
        for a in range(self.dim):
            out.append((self.face(a * self.cell_count + cell), +1))
            lower = int(self.neighbor(a, -1)[cell])
            out.append((self.face(a * self.cell_count + lower), -1))
        return out

    def check_scalar(self, values) -> np.ndarray:
        v = np.asarray(values, dtype=float)
        if v.shape != self.shape:
            raise ValueError(f"scalar field must have shape {self.shape}, got {v.shape}")
        return v

    def check_vector(self, values) -> np.ndarray:
        v = np.asarray(values, dtype=float)
        if v.shape != (self.dim, *self.shape):
            raise ValueError(
                f"vector field must have shape {(self.dim, *self.shape)}, got {v.shape}"
            )
        return v

    def integrate(self, values) -> float | np.ndarray:
        """Mesh integral of a piecewise-constant field (sums over the trailing d axes)."""
        v = np.asarray(values, dtype=float)
        axes = tuple(range(v.ndim - self.dim, v.ndim))
        return self.cell_volume * v.sum(axis=axes)


def build_mesh(dim: int, cells_per_dim: int, domain_length: float = 1.0) -> TorusMesh:
    return TorusMesh(dim, int(cells_per_dim), float(domain_length))


def gauss_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [0, 1]."""
    if order < 1:
        raise ValueError("quadrature order must be >= 1")
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


def cell_quadrature(mesh: TorusMesh, order: int = 3):
    """Yield ``(points, weight)`` with points of shape ``(d, *shape)``.

    Weights are relative (they sum to one), so summing ``weight * f(points)``
    gives cell averages.
    """
    x, w = gauss_rule(order)
    corner = mesh.cell_lower_corners()
    h = mesh.h
    for combo in product(range(order), repeat=mesh.dim):
        offset = np.array([x[i] for i in combo]).reshape((mesh.dim,) + (1,) * mesh.dim)
        yield corner + h * offset, float(np.prod([w[i] for i in combo]))


def project(f: Callable[[np.ndarray], np.ndarray], mesh: TorusMesh, order: int = 3) -> np.ndarray:
    """Cell averages of ``f`` by tensor Gauss quadrature.

    ``f`` receives coordinates of shape ``(d, *pts)`` and returns either
    shape ``pts`` (scalar) or ``(k, *pts)`` (k-vector).  The result has the
    field layout ``mesh.shape`` or ``(k, *mesh.shape)``.
    """
    # accumulate deviations from the first node value: constants come out exact
    base = None
    total = 0.0
    for pts, weight in cell_quadrature(mesh, order):
        val = np.asarray(f(pts), dtype=float)
        if val.ndim == 0:
            val = np.full(mesh.shape, float(val))
        if base is None:
            base = val
        with np.errstate(invalid="ignore"):
            total = total + weight * (val - base)
    total = base + total
    if not np.all(np.isfinite(total)):
        raise ValueError("projection produced non-finite cell averages; check the input function")
    return total


def lift(values: np.ndarray, mesh: TorusMesh) -> Callable[[np.ndarray], np.ndarray]:
    """The step function on the torus whose cell values are ``values``."""
    values = np.asarray(values, dtype=float)
    n, h = mesh.cells_per_dim, mesh.h

    def g(x):
        x = np.asarray(x, dtype=float)
        idx = tuple(np.floor(np.mod(x[a], mesh.domain_length) / h).astype(int) % n
                    for a in range(mesh.dim))
        lead = values.ndim - mesh.dim
        return values[(slice(None),) * lead + idx]

    return g
