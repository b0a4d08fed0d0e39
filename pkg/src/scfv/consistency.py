"""Weak-form consistency defects of a discrete trajectory.

Substituting the piecewise-constant trajectory into the weak formulation
against smooth test functions vanishing at the final time leaves the
defects ``e1`` (continuity) and ``e2`` (momentum)::

    e1 = int_0^T int [rho_h d_t phi + rho_h u_h . grad phi] + int rho_0 phi(0)
    e2 = int_0^T int [m_h . d_t Phi + rho_h u_h (x) u_h : grad Phi + p(rho_h) div Phi]
         - int_0^T int [mu grad_D u_h : grad Phi + lam div_h u_h div Phi]
         + int m_0 . Phi(0)

Time integrals of ``d_t phi`` over a slab are evaluated exactly as
differences of ``phi``; the remaining space-time integrals use tensor Gauss
quadrature on each cell and time slab.  The ``grad_D`` pairing is integrated
over the dual cell of each face (the box of volume ``|sigma| h`` centred on
the face).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Callable

import numpy as np

from . import ops
from .constitutive import GasParams, Viscosity, pressure
from .mesh import TorusMesh, gauss_rule
from .solver import Trajectory

__all__ = [
    "ScalarTestFunction",
    "VectorTestFunction",
    "ConsistencyReport",
    "consistency_residual",
    "separable_scalar",
    "separable_vector",
]


@dataclass(frozen=True)
class ScalarTestFunction:
    """``value(t, x) -> (...)`` and spatial gradient ``grad(t, x) -> (d, ...)``."""

    value: Callable
    grad: Callable
    label: str = "phi"


@dataclass(frozen=True)
class VectorTestFunction:
    """``value(t, x) -> (d, ...)``; ``grad(t, x) -> (d, d, ...)`` indexed [component, derivative]."""

    value: Callable
    grad: Callable
    label: str = "Phi"


@dataclass(frozen=True)
class ConsistencyReport:
    e1: float
    e2: float
    h: float
    dt: float
    phi: str
    bphi: str


def _time_profile(T: float):
    # (1 - t/T)^3: C^2, vanishes with its first two derivatives at t = T
    return (lambda t: (1.0 - t / T) ** 3)


def separable_scalar(T: float, wave=(1, 0), phase: float = 0.0, amplitude: float = 1.0):
    """``phi(t, x) = A (1 - t/T)^3 cos(2 pi k.x + phase)``."""
    psi = _time_profile(T)
    k = 2 * np.pi * np.asarray(wave, dtype=float)

    def arg(x):
        return sum(k[a] * x[a] for a in range(len(k))) + phase

    def value(t, x):
        return amplitude * psi(t) * np.cos(arg(x))

    def grad(t, x):
        s = -amplitude * psi(t) * np.sin(arg(x))
        return np.stack([k[a] * s for a in range(len(k))])

    return ScalarTestFunction(value, grad, f"cos(2pi {tuple(wave)}.x + {phase:g}) (1-t/T)^3")


def separable_vector(T: float, waves, phases=None, amplitude: float = 1.0):
    """One :func:`separable_scalar` profile per component."""
    phases = phases if phases is not None else [0.0] * len(waves)
    comps = [separable_scalar(T, w, p, amplitude) for w, p in zip(waves, phases)]

    def value(t, x):
        return np.stack([c.value(t, x) for c in comps])

    def grad(t, x):
        return np.stack([c.grad(t, x) for c in comps])

    return VectorTestFunction(value, grad, "[" + ", ".join(c.label for c in comps) + "]")


def _box_points(mesh: TorusMesh, order: int, shift=None):
    """Quadrature points over cells (optionally shifted boxes) and relative weights."""
    x, w = gauss_rule(order)
    corner = mesh.cell_lower_corners()
    if shift is not None:
        corner = corner + np.asarray(shift, dtype=float).reshape((mesh.dim,) + (1,) * mesh.dim)
    for combo in product(range(order), repeat=mesh.dim):
        off = np.array([x[i] for i in combo]).reshape((mesh.dim,) + (1,) * mesh.dim)
        yield corner + mesh.h * off, float(np.prod([w[i] for i in combo]))


def _cell_integral(fun, mesh, t, order, shift=None):
    total = 0.0
    for pts, wt in _box_points(mesh, order, shift):
        total = total + wt * fun(t, pts)
    return mesh.cell_volume * total


def _slab_integral(fun, mesh, t0, t1, order_t, order_x, shift=None):
    tq, tw = gauss_rule(order_t)
    total = 0.0
    for s, ws in zip(tq, tw):
        total = total + ws * _cell_integral(fun, mesh, t0 + (t1 - t0) * s, order_x, shift)
    return (t1 - t0) * total


def _check_terminal(fun, mesh, T, order, what):
    worst = 0.0
    for pts, _ in _box_points(mesh, order):
        worst = max(worst, float(np.max(np.abs(fun(T, pts)))))
    if worst > 1e-12:
        raise ValueError(f"test function {what} must vanish at the final time T={T:g} (max |value| {worst:.3e})")


def consistency_residual(traj: Trajectory, phi: ScalarTestFunction, bphi: VectorTestFunction,
                         g: GasParams, visc: Viscosity, rho0=None, m0=None,
                         order_t: int = 3, order_x: int = 3) -> ConsistencyReport:
    """Continuity and momentum defects of ``traj`` against the given test functions.

    With ``rho0``/``m0`` (callables of ``x``) the initial terms use the
    continuous data; otherwise the projected initial state of the trajectory.
    """
    mesh = traj.mesh
    d, h, dt = mesh.dim, mesh.h, traj.dt
    T = traj.end_time
    _check_terminal(phi.value, mesh, T, order_x, "phi")
    _check_terminal(bphi.value, mesh, T, order_x, "Phi")

    def div_bphi(t, x):
        gr = bphi.grad(t, x)
        return sum(gr[a, a] for a in range(d))

    e1 = 0.0
    e2 = 0.0
    # dual cell of face (a, K) is the cell box shifted by h/2 along a
    shifts = [0.5 * h * np.eye(d)[a] for a in range(d)]
    for k in range(traj.steps):
        st = traj.states[k]
        t0, t1 = k * dt, (k + 1) * dt
        rho, m, u = st.rho, st.mom, st.velocity

        dphi = _cell_integral(phi.value, mesh, t1, order_x) - _cell_integral(phi.value, mesh, t0, order_x)
        gphi = _slab_integral(phi.grad, mesh, t0, t1, order_t, order_x)
        e1 += float(np.sum(rho * dphi) + np.sum(m * gphi))

        dbphi = _cell_integral(bphi.value, mesh, t1, order_x) - _cell_integral(bphi.value, mesh, t0, order_x)
        gbphi = _slab_integral(bphi.grad, mesh, t0, t1, order_t, order_x)
        divb = _slab_integral(div_bphi, mesh, t0, t1, order_t, order_x)
        conv = float(np.sum(m[:, None] * u[None, :] * gbphi))
        e2 += float(np.sum(m * dbphi) + conv + np.sum(pressure(rho, g) * divb))

        jumps = ops.grad_D(mesh, u)  # [face axis a, component i, cell]
        visc_term = 0.0
        for a in range(d):
            dual = _slab_integral(lambda t, x, a=a: bphi.grad(t, x)[:, a], mesh, t0, t1,
                                  order_t, order_x, shifts[a])
            visc_term += float(np.sum(jumps[a] * dual))
        e2 -= visc.mu * visc_term
        e2 -= visc.lam * float(np.sum(ops.div_h(mesh, u) * divb))

    if rho0 is None:
        init_rho = float(np.sum(traj.states[0].rho * _cell_integral(phi.value, mesh, 0.0, order_x)))
    else:
        init_rho = float(np.sum(_cell_integral(lambda t, x: rho0(x) * phi.value(t, x), mesh, 0.0, order_x)))
    if m0 is None:
        init_m = float(np.sum(traj.states[0].mom * _cell_integral(bphi.value, mesh, 0.0, order_x)))
    else:
        init_m = float(np.sum(_cell_integral(
            lambda t, x: np.sum(np.asarray(m0(x)) * bphi.value(t, x), axis=0), mesh, 0.0, order_x)))
    e1 += init_rho
    e2 += init_m
    return ConsistencyReport(e1=e1, e2=e2, h=h, dt=dt, phi=phi.label, bphi=bphi.label)
