"""Stochastic collocation: deterministic FV solves at the nodes of a partition.

The approximate statistical solution is the step function in ``omega``
whose value on box ``m`` is the FV trajectory started from the data at node
``m``.  Node solves are independent; results are always reduced in node
order, so statistics do not depend on the number of worker processes.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .constitutive import GasParams, Viscosity, energy
from .mesh import TorusMesh, cell_quadrature
from .models import check_admissible
from .probability import NodeSet, Partition, fine_rule
from .solver import (AdmissibilityError, EnergyLedger, FluidState, SchemeParams, SolverError,
                     Trajectory, init_state, run)

__all__ = [
    "NodeResult",
    "CollocationSolution",
    "CollocationFailure",
    "EnsembleStats",
    "DataErrors",
    "run_collocation",
    "boundedness_statistic",
    "field_statistics",
    "data_interpolation_error",
    "prolong",
    "trajectory_difference",
    "cauchy_difference",
]


@dataclass
class NodeResult:
    index: int
    omega: np.ndarray
    mu: float
    eta: float
    trajectory: Trajectory | None = None
    ledger: EnergyLedger | None = None
    error: str | None = None

    @property
    def rho_linf(self) -> float:
        return self.ledger.rho_linf()

    @property
    def u_linf(self) -> float:
        return self.ledger.u_linf()


@dataclass
class CollocationSolution:
    partition: Partition
    nodes: NodeSet
    mesh: TorusMesh
    params: SchemeParams
    results: list[NodeResult] = field(default_factory=list)
    failed_node: int | None = None
    failure: str | None = None

    @property
    def completed(self) -> bool:
        return self.failed_node is None and len(self.results) == self.partition.nu

    @property
    def weights(self) -> np.ndarray:
        return self.partition.measures

    def evaluate(self, t: float, omega) -> FluidState:
        """State at time ``t`` of the node trajectory for the box containing ``omega``."""
        return self.results[int(self.partition.locate(omega))].trajectory.at(t)


class CollocationFailure(SolverError):
    def __init__(self, node: int, cause: str, partial: CollocationSolution):
        super().__init__(f"collocation node {node} failed: {cause}")
        self.node = node
        self.cause = cause
        self.partial = partial


def _solve_node(args):
    index, omega, model, mesh, params, g, T_final, mu_min = args
    mu, eta = float(model.mu(omega)), float(model.eta(omega))
    res = NodeResult(index, np.asarray(omega, float), mu, eta)
    try:
        visc = Viscosity(mu, eta, dim=mesh.dim, mu_min=mu_min)
        rho0, m0 = model.initial_data(omega)
        state0 = init_state(rho0, m0, mesh, g)
        res.trajectory, res.ledger = run(state0, T_final, params, visc, g)
    except (SolverError, ValueError) as exc:
        res.error = f"{type(exc).__name__}: {exc}"
    return res


def run_collocation(model, p: Partition, nodes: NodeSet, mesh: TorusMesh, params: SchemeParams,
                    g: GasParams, T_final: float, mu_min: float = 1e-8,
                    workers: int = 1) -> CollocationSolution:
    """Solve the FV scheme at every node with one shared mesh.

    Raises :class:`CollocationFailure` (carrying the partial solution) at the
    first failing node in node order.
    """
    problems = check_admissible(model, mu_min)
    if problems:
        raise AdmissibilityError("random data not admissible: " + "; ".join(problems[:5]))
    if len(nodes) != p.nu:
        raise ValueError("node count does not match the partition")
    tasks = [(m, nodes.points[m], model, mesh, params, g, T_final, mu_min) for m in range(p.nu)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_solve_node, tasks))
    else:
        results = [_solve_node(t) for t in tasks]
    sol = CollocationSolution(p, nodes, mesh, params)
    for res in results:
        if res.error is not None:
            sol.failed_node, sol.failure = res.index, res.error
            raise CollocationFailure(res.index, res.error, sol)
        sol.results.append(res)
    return sol


def boundedness_statistic(sol: CollocationSolution) -> float:
    """``sum_m P[box m] (|rho_m|_Linf + |u_m|_Linf)`` over all time levels."""
    if not sol.completed:
        raise ValueError("boundedness statistic needs a completed collocation solution")
    total = 0.0
    for w, r in zip(sol.weights, sol.results):
        total += w * (r.rho_linf + r.u_linf)
    return float(total)


@dataclass
class EnsembleStats:
    times: np.ndarray
    rho_mean: np.ndarray      # (n_times, *shape)
    rho_var: np.ndarray
    u_mean: np.ndarray        # (n_times, d, *shape)
    u_var: np.ndarray
    energy_mean: np.ndarray   # (n_times,)
    energy_var: np.ndarray
    Lambda: float
    clamp: float              # largest negative variance clamped to zero


def _mean_var(weights, values):
    mean = np.tensordot(weights, values, axes=(0, 0))
    var = np.tensordot(weights, values**2, axes=(0, 0)) - mean**2
    clamp = float(max(0.0, -np.min(var))) if var.size else 0.0
    return mean, np.maximum(var, 0.0), clamp


def field_statistics(sol: CollocationSolution, times: Sequence[float], g: GasParams) -> EnsembleStats:
    """Cellwise mean/variance of density and velocity at the requested times."""
    w = sol.weights
    T_end = sol.results[0].trajectory.end_time
    out = {k: [] for k in ("rm", "rv", "um", "uv", "em", "ev")}
    clamp = 0.0
    for t in times:
        if not 0 <= t <= T_end + 1e-12:
            raise ValueError(f"time {t} outside [0, {T_end}]")
        states = [r.trajectory.at(t) for r in sol.results]
        rho = np.array([s.rho for s in states])
        u = np.array([s.velocity for s in states])
        en = np.array([s.energy(g) for s in states])
        for key, vals in (("r", rho), ("u", u), ("e", en)):
            mean, var, c = _mean_var(w, vals)
            out[key + "m"].append(mean)
            out[key + "v"].append(var)
            clamp = max(clamp, c)
    return EnsembleStats(
        times=np.asarray(times, float),
        rho_mean=np.array(out["rm"]), rho_var=np.array(out["rv"]),
        u_mean=np.array(out["um"]), u_var=np.array(out["uv"]),
        energy_mean=np.array(out["em"]), energy_var=np.array(out["ev"]),
        Lambda=boundedness_statistic(sol), clamp=clamp,
    )


@dataclass(frozen=True)
class DataErrors:
    rho: float        # E || rho0^M - rho0 ||_{L^gamma}
    mom: float        # E || m0^M - m0 ||_{L^{2 gamma/(gamma+1)}}
    energy: float     # | E int E(rho0^M, m0^M) - E int E(rho0, m0) |
    mu: float         # E | mu^M - mu |
    eta: float        # E | eta^M - eta |
    estimator: str


def _x_rule(mesh: TorusMesh, order: int):
    pts, wts = [], []
    for p, w in cell_quadrature(mesh, order):
        pts.append(p.reshape(mesh.dim, -1))
        wts.append(np.full(mesh.cell_count, w * mesh.cell_volume))
    return np.concatenate(pts, axis=1), np.concatenate(wts)


def data_interpolation_error(model, p: Partition, nodes: NodeSet, mesh: TorusMesh, g: GasParams,
                             refine: int = 8, order: int = 2, chunk: int = 256) -> DataErrors:
    """Expected data interpolation errors, by a fine midpoint rule over ``omega``.

    Spatial norms use tensor Gauss quadrature of order ``order`` on the cells
    of ``mesh`` applied to the continuous data (no projection).
    """
    gamma = g.gamma
    q_m = 2 * gamma / (gamma + 1)
    xp, xw = _x_rule(mesh, order)
    wp, ww = fine_rule(p, refine=refine, min_points=0)
    box = p.locate(wp)

    x3 = xp[:, None, :]
    node_pts = nodes.points.T[:, :, None]
    node_rho = model.rho0(x3, node_pts)                      # (nu, P)
    node_m = model.m0(x3, node_pts)                          # (d, nu, P)
    node_energy = np.sum(energy(node_rho, node_m, g) * xw, axis=-1)
    e_interp = float(np.dot(p.measures, node_energy))

    err_rho = err_m = e_exact = 0.0
    for s in range(0, len(ww), chunk):
        sl = slice(s, s + chunk)
        om = wp[:, sl][:, :, None]
        rho = model.rho0(x3, om)
        m = model.m0(x3, om)
        b = box[sl]
        d_rho = np.abs(node_rho[b] - rho)
        d_m = np.sqrt(np.sum((node_m[:, b] - m) ** 2, axis=0))
        err_rho += float(np.dot(ww[sl], np.sum(d_rho**gamma * xw, axis=-1) ** (1 / gamma)))
        err_m += float(np.dot(ww[sl], np.sum(d_m**q_m * xw, axis=-1) ** (1 / q_m)))
        e_exact += float(np.dot(ww[sl], np.sum(energy(rho, m, g) * xw, axis=-1)))

    mu_nodes = np.array([model.mu(w) for w in nodes.points])
    eta_nodes = np.array([model.eta(w) for w in nodes.points])
    err_mu = float(np.dot(ww, np.abs(mu_nodes[box] - model.mu(wp))))
    err_eta = float(np.dot(ww, np.abs(eta_nodes[box] - model.eta(wp))))
    return DataErrors(err_rho, err_m, abs(e_interp - e_exact), err_mu, err_eta,
                      estimator=f"midpoint over omega ({len(ww)} points, refine {refine}); "
                                f"Gauss order {order} on {mesh.cells_per_dim}^{mesh.dim} cells")


def prolong(values: np.ndarray, factor: int, dim: int) -> np.ndarray:
    """Constant prolongation of a cell field onto a mesh refined ``factor`` times per axis."""
    out = np.asarray(values)
    lead = out.ndim - dim
    for a in range(dim):
        out = np.repeat(out, factor, axis=lead + a)
    return out


def _time_breaks(dts, T: float) -> np.ndarray:
    pts = [np.arange(int(np.floor(T / dt + 1e-9)) + 1) * dt for dt in dts]
    brk = np.unique(np.concatenate(pts + [[0.0, T]]))
    brk = brk[brk <= T * (1 + 1e-12)]
    # merge breakpoints closer than roundoff
    keep = np.concatenate([[True], np.diff(brk) > 1e-12 * max(T, 1.0)])
    return brk[keep]


def trajectory_difference(coarse: Trajectory, fine: Trajectory, gamma: float,
                          T: float | None = None) -> tuple[float, float]:
    """``(||rho_c - rho_f||_{L^gamma}, ||u_c - u_f||_{L^2})`` over ``(0, T) x torus``.

    The coarse fields are prolonged to the fine mesh; the time integral is
    exact over the union of both time grids.
    """
    mc, mf = coarse.mesh, fine.mesh
    if mc.dim != mf.dim or mf.cells_per_dim % mc.cells_per_dim:
        raise ValueError("fine mesh must refine the coarse mesh by an integer factor")
    factor = mf.cells_per_dim // mc.cells_per_dim
    if T is None:
        T = min(coarse.end_time, fine.end_time)
    brk = _time_breaks((coarse.dt, fine.dt), T)
    acc_rho = acc_u = 0.0
    for t0, t1 in zip(brk[:-1], brk[1:]):
        tm = 0.5 * (t0 + t1)
        sc, sf = coarse.at(tm), fine.at(tm)
        d_rho = np.abs(prolong(sc.rho, factor, mf.dim) - sf.rho)
        d_u = prolong(sc.velocity, factor, mf.dim) - sf.velocity
        acc_rho += (t1 - t0) * mf.cell_volume * float(np.sum(d_rho**gamma))
        acc_u += (t1 - t0) * mf.cell_volume * float(np.sum(d_u**2))
    return acc_rho ** (1 / gamma), acc_u**0.5


def cauchy_difference(coarse: CollocationSolution, fine: CollocationSolution, gamma: float,
                      T: float | None = None) -> tuple[float, float]:
    """Expectation-weighted :func:`trajectory_difference` of two collocation levels.

    Every fine box lies in exactly one coarse box; the pair (coarse node of
    that box, fine node) is weighted with the fine box measure, which is the
    exact expectation of the difference of the two step functions in ``omega``.
    """
    pc, pf = coarse.partition, fine.partition
    if pf.cells_per_axis % pc.cells_per_axis:
        raise ValueError("fine partition must refine the coarse partition")
    mids = 0.5 * (pf.lower + pf.upper)
    parent = pc.locate(mids.T)
    e_rho = e_u = 0.0
    for j, (w, m) in enumerate(zip(pf.measures, np.atleast_1d(parent))):
        d_rho, d_u = trajectory_difference(coarse.results[m].trajectory,
                                           fine.results[j].trajectory, gamma, T)
        e_rho += w * d_rho
        e_u += w * d_u
    return float(e_rho), float(e_u)
