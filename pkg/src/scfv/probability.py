"""Partitions of the parameter hypercube, collocation nodes and step interpolants.

The probability space is ``[0, 1]^N`` with ``P = rho(y) dy``.  Partitions
are tensor grids of half-open boxes ``[lo, hi)``; the upper boundary
``y_i = 1`` belongs to the last box along each axis.  Box ``m`` of a grid
with ``c`` cells per axis has multi-index ``np.unravel_index(m, (c,)*N)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Sequence

import numpy as np

from .mesh import gauss_rule

__all__ = [
    "ProbabilityBox",
    "Partition",
    "NodeSet",
    "StepInterpolant",
    "LqEstimate",
    "build_partition",
    "choose_nodes",
    "interpolate",
    "expectation",
    "lq_error",
    "moments",
    "fine_rule",
]


def _uniform(y):
    return np.ones(np.shape(y)[1:])


@dataclass(frozen=True)
class ProbabilityBox:
    """``[0, 1]^N`` with a density ``density(y)``; ``y`` has shape ``(N, ...)``."""

    param_dim: int
    density: Callable = _uniform
    quad_cells: int = 16
    quad_order: int = 4

    def __post_init__(self):
        if self.param_dim < 1:
            raise ValueError("param_dim must be >= 1")
        total = _box_integral(self.density, np.zeros(self.param_dim), np.ones(self.param_dim),
                              self.quad_cells, self.quad_order)
        if abs(total - 1.0) > 1e-8:
            raise ValueError(f"density must integrate to 1 over the unit cube, got {total:.12g}")

    @property
    def is_uniform(self) -> bool:
        return self.density is _uniform


def _box_integral(fun, lo, hi, cells: int, order: int) -> float:
    """Tensor Gauss integral of ``fun`` over the box ``[lo, hi]``."""
    lo, hi = np.asarray(lo, float), np.asarray(hi, float)
    pts, wts = _tensor_rule(lo, hi, cells, order)
    return float(np.sum(wts * fun(pts)))


def _tensor_rule(lo, hi, cells: int, order: int):
    x, w = gauss_rule(order)
    n = len(lo)
    axes_pts, axes_wts = [], []
    for i in range(n):
        edges = np.linspace(lo[i], hi[i], cells + 1)
        width = np.diff(edges)
        axes_pts.append((edges[:-1, None] + width[:, None] * x[None, :]).ravel())
        axes_wts.append((width[:, None] * w[None, :]).ravel())
    grids = np.meshgrid(*axes_pts, indexing="ij")
    wgrid = np.ones_like(grids[0])
    for i, wi in enumerate(np.meshgrid(*axes_wts, indexing="ij")):
        wgrid = wgrid * wi
    return np.array([gr.ravel() for gr in grids]), wgrid.ravel()


@dataclass(frozen=True)
class Partition:
    space: ProbabilityBox
    cells_per_axis: int
    lower: np.ndarray = field(repr=False)
    upper: np.ndarray = field(repr=False)
    measures: np.ndarray = field(repr=False)

    @property
    def nu(self) -> int:
        return len(self.measures)

    @property
    def diam(self) -> float:
        return float(np.max(self.upper - self.lower))

    @property
    def param_dim(self) -> int:
        return self.space.param_dim

    def locate(self, omega) -> np.ndarray:
        """Index of the box containing each point; ``omega`` has shape ``(N,)`` or ``(N, k)``."""
        w = np.asarray(omega, dtype=float)
        single = w.ndim == 1
        w = w.reshape(self.param_dim, -1)
        if np.any(w < 0) or np.any(w > 1) or not np.all(np.isfinite(w)):
            raise ValueError("evaluation point lies outside the unit cube")
        c = self.cells_per_axis
        idx = np.minimum(np.floor(w * c).astype(int), c - 1)
        flat = np.ravel_multi_index(tuple(idx), (c,) * self.param_dim)
        return flat[0] if single else flat

    def contains(self, m: int, omega) -> bool:
        return bool(self.locate(np.asarray(omega, float)) == m)


def build_partition(space: ProbabilityBox, cells_per_axis: int) -> Partition:
    if cells_per_axis < 1:
        raise ValueError("cells_per_axis must be >= 1")
    c, n = int(cells_per_axis), space.param_dim
    edges = np.linspace(0.0, 1.0, c + 1)
    multi = np.array(list(product(range(c), repeat=n))).reshape(-1, n)
    lower = edges[multi]
    upper = edges[multi + 1]
    if space.is_uniform:
        measures = np.prod(upper - lower, axis=1)
    else:
        sub = max(1, space.quad_cells // c)
        measures = np.array([_box_integral(space.density, lo, hi, sub, space.quad_order)
                             for lo, hi in zip(lower, upper)])
    if abs(measures.sum() - 1.0) > 1e-10:
        raise ValueError(
            f"partition measures sum to {measures.sum():.14g}; density/quadrature misconfigured"
        )
    return Partition(space, c, lower, upper, measures)


@dataclass(frozen=True)
class NodeSet:
    points: np.ndarray  # (nu, N)
    rule: str
    seed: int | None = None

    def __len__(self):
        return len(self.points)


def choose_nodes(p: Partition, rule: str = "midpoint", seed: int | None = None) -> NodeSet:
    """Collocation nodes: ``midpoint``, ``corner`` (box minima) or ``random`` (seeded)."""
    if rule == "midpoint":
        pts = 0.5 * (p.lower + p.upper)
    elif rule == "corner":
        pts = p.lower.copy()
    elif rule == "random":
        rng = np.random.default_rng(seed)
        # half-open boxes: [lo, hi) stays inside its box
        pts = p.lower + (p.upper - p.lower) * rng.random(p.lower.shape)
    else:
        raise ValueError(f"unknown node rule {rule!r}; use midpoint, corner or random")
    return NodeSet(pts, rule, seed if rule == "random" else None)


@dataclass(frozen=True)
class StepInterpolant:
    """``f^M(omega) = sum_m values[m] 1_{box m}(omega)``."""

    partition: Partition
    values: np.ndarray  # leading axis indexes boxes

    def __call__(self, omega):
        return self.values[self.partition.locate(omega)]


def interpolate(f: Callable, p: Partition, nodes: NodeSet) -> StepInterpolant:
    """Evaluate ``f`` (a function of one point ``omega`` of shape ``(N,)``) at every node."""
    if len(nodes) != p.nu:
        raise ValueError("node count does not match the partition")
    vals = np.array([np.asarray(f(w), dtype=float) for w in nodes.points])
    return StepInterpolant(p, vals)


def expectation(s: StepInterpolant):
    """Exact expectation of a step interpolant: ``sum_m value_m P[box m]``."""
    w = s.partition.measures
    v = np.asarray(s.values, dtype=float)
    out = np.tensordot(w, v, axes=(0, 0))
    return float(out) if np.ndim(out) == 0 else out


def moments(s: StepInterpolant, orders: Sequence[int] = (1, 2)) -> dict:
    """Raw and central moments of a scalar interpolant, plus mean/variance."""
    v = np.asarray(s.values, dtype=float)
    if v.ndim != 1:
        raise ValueError("moments need a scalar-valued interpolant")
    w = s.partition.measures
    mean = float(np.dot(w, v))
    out = {"mean": mean, "variance": max(float(np.dot(w, (v - mean) ** 2)), 0.0)}
    for k in orders:
        out[f"raw_{k}"] = float(np.dot(w, v**k))
        out[f"central_{k}"] = float(np.dot(w, (v - mean) ** k))
    return out


@dataclass(frozen=True)
class LqEstimate:
    value: float
    estimator: str
    points: int
    stderr: float = 0.0


def fine_rule(p: Partition, refine: int | None = None, order: int = 1, min_points: int | None = None):
    """Quadrature points/weights (w.r.t. ``P``) refining every box ``refine`` times per axis.

    The default refinement is at least 8 and grows so the fine grid has at
    least ``min_points`` points per axis (default 16384, 512, 64 for N = 1, 2, 3).
    """
    n = p.param_dim
    if min_points is None:
        min_points = {1: 16384, 2: 512, 3: 64}.get(n, 16)
    if refine is None:
        refine = max(8, -(-min_points // (p.cells_per_axis * order)))
    lo = np.zeros(n)
    hi = np.ones(n)
    pts, wts = _tensor_rule(lo, hi, p.cells_per_axis * refine, order)
    wts = wts * p.space.density(pts)
    return pts, wts


def lq_error(s: StepInterpolant, f: Callable, q: float = 1.0, refine: int | None = None,
             mc_samples: int = 200_000, seed: int = 0, vectorized: bool = False) -> LqEstimate:
    """Estimate ``E[|f^M - f|^q]`` (no root taken).

    Fine tensor quadrature for ``N <= 3``; seeded Monte Carlo with a reported
    standard error beyond.  ``f`` takes one point of shape ``(N,)`` unless
    ``vectorized`` is set, in which case it receives ``(N, k)`` and returns ``(k,)``.
    """
    if not 1 <= q < np.inf:
        raise ValueError("q must lie in [1, inf)")
    p = s.partition
    if p.param_dim <= 3:
        pts, wts = fine_rule(p, refine)
        estimator = f"tensor-midpoint({len(wts)} points, refine>={8})"
    else:
        rng = np.random.default_rng(seed)
        pts = rng.random((p.param_dim, mc_samples))
        wts = p.space.density(pts) / mc_samples
        estimator = f"monte-carlo({mc_samples} samples, seed={seed})"
    fvals = f(pts) if vectorized else np.array([f(pts[:, i]) for i in range(pts.shape[1])])
    vals = np.asarray(s(pts))
    diff = np.abs(vals - fvals)
    if diff.ndim > 1:
        diff = np.sqrt(np.sum(diff.reshape(diff.shape[0], -1) ** 2, axis=1))
    contrib = diff**q
    value = float(np.sum(wts * contrib))
    stderr = 0.0
    if p.param_dim > 3:
        g = contrib * wts * mc_samples
        stderr = float(np.std(g, ddof=1) / np.sqrt(mc_samples))
    return LqEstimate(value, estimator, len(wts), stderr)
