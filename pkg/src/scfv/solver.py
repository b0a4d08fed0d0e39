"""Implicit finite volume scheme for the barotropic Navier-Stokes system on the torus.

Testing the weak scheme with cell indicators gives, per cell ``K``::

    (rho^k - rho^{k-1})/dt + div_F[F_h(rho^k, u^k)]                 = 0
    (m^k - m^{k-1})/dt + div_F[F_h(m^k, u^k)] + grad_h p(rho^k)    = mu lap_h u^k + lam grad_h div_h u^k

where ``div_F`` sums ``|sigma|/|K| F n_out`` over the faces of ``K``.  The
backward Euler system is solved by Picard iteration: the advecting velocity
is frozen at the previous iterate, which makes the density update and then
the momentum update (unknown ``u`` with ``m = rho u``) linear.  Each linear
update is written as a defect correction ``x <- x - A^{-1} R(x)`` so that a
state with zero defect (e.g. any constant state) is reproduced bit-exactly.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from . import ops
from .constitutive import GasParams, Viscosity, energy, pressure, total_energy
from .flux import FluxParams, mesh_flux
from .mesh import TorusMesh, project

__all__ = [
    "FluidState",
    "SchemeParams",
    "Trajectory",
    "EnergyLedger",
    "SolverError",
    "PicardNonConvergence",
    "PositivityError",
    "AdmissibilityError",
    "init_state",
    "step",
    "run",
    "numerical_dissipation",
    "viscous_dissipation",
]

log = logging.getLogger(__name__)


class SolverError(RuntimeError):
    step_index: int | None = None


class PicardNonConvergence(SolverError):
    pass


class PositivityError(SolverError):
    pass


class AdmissibilityError(ValueError):
    pass


@dataclass(frozen=True)
class FluidState:
    mesh: TorusMesh
    rho: np.ndarray
    mom: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.mesh.check_scalar(self.rho)
        self.mesh.check_vector(self.mom)

    @property
    def velocity(self) -> np.ndarray:
        return self.mom / self.rho

    def mass(self) -> float:
        return float(self.mesh.integrate(self.rho))

    def energy(self, g: GasParams) -> float:
        return total_energy(self.mesh, self.rho, self.mom, g)

    def rho_linf(self) -> float:
        return float(np.max(np.abs(self.rho)))

    def u_linf(self) -> float:
        return float(np.max(np.sqrt(np.sum(self.velocity**2, axis=0))))


@dataclass(frozen=True)
class SchemeParams:
    dt: float
    flux: FluxParams
    cfl: float = 0.1
    picard_tol: float = 1e-10
    picard_max_iter: int = 50
    tol_energy: float = 1e-8

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"time step must be positive, got dt={self.dt}")
        if not self.picard_tol > 0:
            raise ValueError("picard_tol must be positive")
        if self.picard_max_iter < 1:
            raise ValueError("picard_max_iter must be >= 1")
        if not self.dt / self.flux.h < 10.0:
            raise ValueError(f"dt/h = {self.dt / self.flux.h:g} is not bounded; the scheme needs dt ~ h")

    @classmethod
    def for_mesh(cls, mesh: TorusMesh, cfl: float = 0.1, eps: float = 1.0,
                 picard_tol: float = 1e-10, picard_max_iter: int = 50,
                 tol_energy: float = 1e-8) -> "SchemeParams":
        if not cfl > 0:
            raise ValueError(f"cfl must be positive, got {cfl}")
        return cls(dt=cfl * mesh.h, flux=FluxParams(eps=eps, h=mesh.h), cfl=cfl,
                   picard_tol=picard_tol, picard_max_iter=picard_max_iter,
                   tol_energy=tol_energy)


@dataclass
class Trajectory:
    """States at ``t_k = k dt``, piecewise constant in time.

    The value on ``[t_k, t_{k+1})`` is state ``k``; times at or past the last
    level return the last state.
    """

    dt: float
    states: list[FluidState] = field(default_factory=list)

    @property
    def mesh(self) -> TorusMesh:
        return self.states[0].mesh

    @property
    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.states])

    @property
    def steps(self) -> int:
        return len(self.states) - 1

    @property
    def end_time(self) -> float:
        return self.steps * self.dt

    def index_at(self, t: float) -> int:
        if t < 0:
            raise ValueError("trajectory is defined for t >= 0 only")
        k = int(math.floor(t / self.dt + 1e-9))
        return min(k, self.steps)

    def at(self, t: float) -> FluidState:
        return self.states[self.index_at(t)]

    def rho_linf(self) -> float:
        return max(s.rho_linf() for s in self.states)

    def u_linf(self) -> float:
        return max(s.u_linf() for s in self.states)


LEDGER_COLUMNS = ("step", "time", "energy", "mass", "dissipation", "numerical_dissipation",
                  "rho_Linf", "u_Linf", "picard_iterations")


@dataclass
class EnergyLedger:
    """Per-time-level energy, mass and L-infinity bookkeeping.

    ``dissipation[k]`` is ``dt (mu |grad_D u^k|^2 + lam |div_h u^k|^2)`` and
    ``numerical_dissipation[k]`` the residual ``E_{k-1} - E_k - dissipation[k]``;
    both are zero at ``k = 0``.
    """

    rows: list[dict] = field(default_factory=list)

    def append(self, **row):
        self.rows.append(row)

    def column(self, name: str) -> np.ndarray:
        return np.array([r[name] for r in self.rows])

    def __len__(self):
        return len(self.rows)

    @property
    def energy(self) -> np.ndarray:
        return self.column("energy")

    @property
    def mass(self) -> np.ndarray:
        return self.column("mass")

    @property
    def dissipation(self) -> np.ndarray:
        return self.column("dissipation")

    @property
    def numerical_dissipation(self) -> np.ndarray:
        return self.column("numerical_dissipation")

    def rho_linf(self) -> float:
        return float(self.column("rho_Linf").max())

    def u_linf(self) -> float:
        return float(self.column("u_Linf").max())

    def energy_excess(self) -> np.ndarray:
        """``E_k + cumulative viscous dissipation - E_0`` per level (should be <= tol)."""
        e = self.energy
        return e + np.cumsum(self.dissipation) - e[0]

    def energy_inequality_holds(self, rel_tol: float = 1e-8) -> bool:
        """Energy excess and every step residual within ``rel_tol * E_0``."""
        bound = rel_tol * abs(self.energy[0])
        return bool(np.max(self.energy_excess()) <= bound
                    and np.min(self.numerical_dissipation) >= -bound)


def init_state(rho0, m0, mesh: TorusMesh, g: GasParams | None = None, order: int = 3) -> FluidState:
    """Project the initial data onto cell averages.

    ``rho0(x)`` returns the density at points ``x`` of shape ``(d, ...)``,
    ``m0(x)`` the momentum with shape ``(d, ...)``.
    """
    rho = project(rho0, mesh, order)
    mom = project(m0, mesh, order)
    if mom.shape != (mesh.dim, *mesh.shape):
        mom = np.broadcast_to(mom, (mesh.dim, *mesh.shape)).copy()
    if not np.all(rho > 0):
        bad = int(np.sum(rho <= 0))
        raise AdmissibilityError(
            f"initial density is not admissible: {bad} projected cell(s) with rho <= 0 "
            f"(min {rho.min():.6g}); admissible data need inf rho0 > 0"
        )
    return FluidState(mesh, rho, mom, 0.0)


def viscous_dissipation(mesh: TorusMesh, u: np.ndarray, visc: Viscosity) -> float:
    """``mu |grad_D u|^2 + lam |div_h u|^2`` (a rate; multiply by dt per step)."""
    return visc.mu * ops.dissipation_seminorm(mesh, u) + visc.lam * float(
        mesh.cell_volume * np.sum(ops.div_h(mesh, u) ** 2)
    )


def numerical_dissipation(prev: FluidState, nxt: FluidState, params: SchemeParams,
                          visc: Viscosity, g: GasParams) -> float:
    """Energy-balance residual ``E(prev) - E(next) - dt * viscous terms at next``."""
    return prev.energy(g) - nxt.energy(g) - params.dt * viscous_dissipation(
        nxt.mesh, nxt.velocity, visc
    )


# -- linear operators of the frozen-velocity problem -------------------------

def _face_normal_velocity(mesh: TorusMesh, u: np.ndarray) -> np.ndarray:
    return np.stack([0.5 * (u[a] + np.roll(u[a], -1, axis=a)) for a in range(mesh.dim)])


def _transport_matrix(mesh: TorusMesh, vn: np.ndarray, diffusion: float) -> sp.csc_matrix:
    """Matrix of ``q -> div_F[F_h(q, u*)]`` for fixed face normal velocities ``vn``."""
    n, h = mesh.cell_count, mesh.h
    k = np.arange(n)
    rows, cols, vals = [], [], []
    for a in range(mesh.dim):
        kp = mesh.neighbor(a, 1)
        v = vn[a].ravel()
        c_in = (0.5 * v + 0.5 * np.abs(v) + diffusion) / h
        c_out = (0.5 * v - 0.5 * np.abs(v) - diffusion) / h
        rows += [k, k, kp, kp]
        cols += [k, kp, k, kp]
        vals += [c_in, c_out, -c_in, -c_out]
    return sp.csc_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                         shape=(n, n))


def _laplace_matrix(mesh: TorusMesh) -> sp.csc_matrix:
    n, h = mesh.cell_count, mesh.h
    k = np.arange(n)
    rows, cols, vals = [], [], []
    for a in range(mesh.dim):
        for d in (-1, 1):
            rows += [k, k]
            cols += [mesh.neighbor(a, d), k]
            vals += [np.full(n, 1.0 / h**2), np.full(n, -1.0 / h**2)]
    return sp.csc_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                         shape=(n, n))


def _grad_matrices(mesh: TorusMesh) -> list[sp.csc_matrix]:
    n, h = mesh.cell_count, mesh.h
    k = np.arange(n)
    out = []
    for a in range(mesh.dim):
        rows = np.concatenate([k, k])
        cols = np.concatenate([mesh.neighbor(a, 1), mesh.neighbor(a, -1)])
        vals = np.concatenate([np.full(n, 0.5 / h), np.full(n, -0.5 / h)])
        out.append(sp.csc_matrix((vals, (rows, cols)), shape=(n, n)))
    return out


class _Operators:
    """Velocity-independent matrices, cached per mesh."""

    _cache: dict = {}

    def __init__(self, mesh: TorusMesh):
        self.laplace = _laplace_matrix(mesh)
        grads = _grad_matrices(mesh)
        self.grad_div = sp.bmat([[gi @ gj for gj in grads] for gi in grads], format="csc")

    @classmethod
    def get(cls, mesh: TorusMesh) -> "_Operators":
        key = (mesh.dim, mesh.cells_per_dim, mesh.domain_length)
        if key not in cls._cache:
            cls._cache[key] = cls(mesh)
        return cls._cache[key]


def _density_residual(mesh, rho, rho_old, vn, params):
    flux = mesh_flux(ops.face_avg(mesh, rho), ops.face_jump(mesh, rho), vn, params.flux)
    return (rho - rho_old) / params.dt + ops.face_divergence(mesh, flux)


def _momentum_residual(mesh, rho, u, m_old, vn, params, visc, g):
    m = rho * u
    favg, fjump = ops.face_avg(mesh, m), ops.face_jump(mesh, m)
    # vn[a] broadcasts over the momentum components
    flux = np.stack([mesh_flux(favg[a], fjump[a], vn[a], params.flux) for a in range(mesh.dim)])
    res = (m - m_old) / params.dt + ops.face_divergence(mesh, flux)
    res = res + ops.grad_h(mesh, pressure(rho, g))
    res = res - visc.mu * ops.laplace_h(mesh, u)
    res = res - visc.lam * ops.grad_h(mesh, ops.div_h(mesh, u))
    return res


def step(state: FluidState, params: SchemeParams, visc: Viscosity, g: GasParams) -> FluidState:
    """Advance one backward Euler step; returns the state at ``time + dt``."""
    return _advance(state, params, visc, g)[0]


def _advance(state, params, visc, g):
    mesh = state.mesh
    n, d, dt = mesh.cell_count, mesh.dim, params.dt
    rho_old, m_old = state.rho, state.mom
    rho, u = rho_old, state.velocity
    ident = sp.identity(n, format="csc")
    lap = _Operators.get(mesh)

    incr = np.inf
    for it in range(1, params.picard_max_iter + 1):
        vn = _face_normal_velocity(mesh, u)
        transport = _transport_matrix(mesh, vn, params.flux.diffusion)

        res = _density_residual(mesh, rho, rho_old, vn, params)
        rho_new = rho - spsolve(ident / dt + transport, res.ravel()).reshape(mesh.shape)
        if not np.all(rho_new > 0):
            raise PositivityError(
                f"nonpositive density (min {rho_new.min():.3e}) at t={state.time + dt:.6g}, "
                f"Picard iteration {it}"
            )

        res_m = _momentum_residual(mesh, rho_new, u, m_old, vn, params, visc, g)
        r_diag = sp.diags(rho_new.ravel(), format="csc")
        block = r_diag / dt + transport @ r_diag - visc.mu * lap.laplace
        jac = sp.block_diag([block] * d, format="csc") - visc.lam * lap.grad_div
        u_new = u - spsolve(jac, res_m.ravel()).reshape(u.shape)

        incr = max(float(np.max(np.abs(rho_new - rho))),
                   float(np.max(np.abs(rho_new * u_new - rho * u))))
        rho, u = rho_new, u_new
        if not np.all(np.isfinite(u)):
            break
        if incr < params.picard_tol:
            log.debug("Picard converged in %d iterations (increment %.3e)", it, incr)
            return FluidState(mesh, rho, rho * u, state.time + dt), it
    raise PicardNonConvergence(
        f"Picard iteration did not converge in {params.picard_max_iter} iterations at "
        f"t={state.time + dt:.6g} (last increment {incr:.3e}); try a smaller cfl"
    )


def steps_for(T_final: float, dt: float) -> int:
    return max(1, int(math.ceil(T_final / dt - 1e-9)))


def run(state0: FluidState, T_final: float, params: SchemeParams, visc: Viscosity,
        g: GasParams) -> tuple[Trajectory, EnergyLedger]:
    if not T_final > 0:
        raise ValueError("T_final must be positive")
    n_steps = steps_for(T_final, params.dt)
    traj = Trajectory(params.dt, [state0])
    ledger = EnergyLedger()
    e_prev = state0.energy(g)
    ledger.append(step=0, time=0.0, energy=e_prev, mass=state0.mass(), dissipation=0.0,
                  numerical_dissipation=0.0, rho_Linf=state0.rho_linf(),
                  u_Linf=state0.u_linf(), picard_iterations=0)
    state = state0
    for k in range(1, n_steps + 1):
        try:
            nxt, iters = _advance(state, params, visc, g)
        except SolverError as exc:
            exc.step_index = k
            exc.args = (f"step {k}: {exc.args[0]}",)
            raise
        # exact multiple of dt keeps times free of accumulated drift
        nxt = FluidState(nxt.mesh, nxt.rho, nxt.mom, k * params.dt)
        e = nxt.energy(g)
        diss = params.dt * viscous_dissipation(nxt.mesh, nxt.velocity, visc)
        ledger.append(step=k, time=k * params.dt, energy=e, mass=nxt.mass(), dissipation=diss,
                      numerical_dissipation=e_prev - e - diss, rho_Linf=nxt.rho_linf(),
                      u_Linf=nxt.u_linf(), picard_iterations=iters)
        traj.states.append(nxt)
        state, e_prev = nxt, e
    if not ledger.energy_inequality_holds(params.tol_energy):
        log.warning("energy inequality violated beyond tol_energy=%g (relative to E_0)", params.tol_energy)
    return traj, ledger

