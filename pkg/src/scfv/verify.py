"""Invariant suite run by ``scfv verify``: one pass/fail line per property.

Checks are small and deterministic; the solver-based ones use the gas,
scheme and data of the given config at a single node ``omega`` on a mesh of
at most 16 cells per axis.
"""

from __future__ import annotations

import tempfile
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from . import ops
from .config import RunConfig, parse_config
from .constitutive import Viscosity
from .flux import FluxParams, diss_flux, upwind
from .io import read_field, write_field
from .mesh import TorusMesh
from .models import FourierModel, LevelFunction
from .probability import ProbabilityBox, build_partition, choose_nodes, interpolate, lq_error
from .solver import FluidState, init_state, run, step

__all__ = ["CheckResult", "run_checks", "CHECKS"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail} ({self.seconds:.2f} s)"


def _flux_oracle(cfg: RunConfig):
    rng = np.random.default_rng(1)
    n = 10_000
    r_in, r_out = rng.uniform(0.05, 3.0, (2, n))
    v_in, v_out = rng.uniform(-2.0, 2.0, (2, 2, n))
    normal = np.array([1.0, 0.0])
    params = FluxParams(cfg.scheme.flux.eps, cfg.scheme.flux.h)
    f = diss_flux(r_in, r_out, v_in, v_out, normal, params)
    vn = 0.5 * (v_in[0] + v_out[0])
    a = 0.5 * (r_in + r_out) * vn
    b = (params.diffusion + 0.5 * np.abs(vn)) * (r_out - r_in)
    ulps = float(np.max(np.abs(f - (a - b)) / np.spacing(np.maximum(np.abs(a), np.abs(b)))))
    up = upwind(r_in, r_out, v_in, v_out, normal)
    pos = vn > 0
    exact = bool(np.array_equal(up[pos], (vn * r_in)[pos]))
    return ulps <= 4 and exact, f"max {ulps:g} ulp, upwind identity exact={exact}"


def _duality(cfg: RunConfig):
    rng = np.random.default_rng(2)
    worst = 0.0
    for d in (2, 3):
        mesh = TorusMesh(d, 4)
        r, s = rng.standard_normal((2,) + mesh.shape)
        lhs = mesh.cell_volume * np.sum(ops.laplace_h(mesh, r) * s)
        rhs = mesh.face_area * np.sum(ops.face_jump(mesh, r) * ops.face_jump(mesh, s)) / mesh.h
        worst = max(worst, abs(lhs + rhs) / max(abs(lhs), abs(rhs)))
    return worst <= 1e-12, f"relative defect {worst:.2e}"


def _totals(cfg: RunConfig):
    rng = np.random.default_rng(3)
    worst = 0.0
    for d in (2, 3):
        mesh = TorusMesh(d, 4)
        r = rng.standard_normal(mesh.shape)
        v = rng.standard_normal((d,) + mesh.shape)
        worst = max(worst, float(np.max(np.abs(mesh.integrate(ops.grad_h(mesh, r))))),
                    abs(float(mesh.integrate(ops.div_h(mesh, v)))))
    return worst <= 1e-13, f"max |total| {worst:.2e}"


def _small(cfg: RunConfig):
    mesh = cfg.mesh if cfg.mesh.cells_per_dim <= 16 else cfg.mesh_for(16)
    omega = np.asarray(cfg.omega)
    visc = Viscosity(cfg.model.mu(omega), cfg.model.eta(omega), mesh.dim, cfg.mu_min)
    rho0, m0 = cfg.model.initial_data(omega)
    return mesh, cfg.scheme_for(mesh), visc, init_state(rho0, m0, mesh, cfg.gas)


def _solve(cfg: RunConfig):
    mesh, params, visc, s0 = _small(cfg)
    return run(s0, min(cfg.T_final, 20 * params.dt), params, visc, cfg.gas)


def _mass_positivity(cfg: RunConfig):
    traj, ledger = _solve(cfg)
    mass = ledger.mass
    drift = float(np.max(np.abs(mass - mass[0])) / mass[0])
    rmin = min(float(s.rho.min()) for s in traj.states)
    return drift <= 1e-12 and rmin > 0, f"mass drift {drift:.2e}, min rho {rmin:.4g}"


def _energy(cfg: RunConfig):
    _, ledger = _solve(cfg)
    e0 = ledger.energy[0]
    excess = float(np.max(ledger.energy_excess()))
    ndiss = float(np.min(ledger.numerical_dissipation))
    ok = excess <= 1e-8 * e0 and ndiss >= -1e-10
    return ok, f"max energy excess {excess:.2e} (E0 {e0:.4g}), min numerical dissipation {ndiss:.2e}"


def _fixed_point(cfg: RunConfig):
    mesh, params, visc, _ = _small(cfg)
    mesh = TorusMesh(mesh.dim, 8, mesh.domain_length)
    params = cfg.scheme_for(mesh)
    const_u = np.array([0.3, -0.2, 0.1][: mesh.dim]).reshape((mesh.dim,) + (1,) * mesh.dim)
    rho = np.full(mesh.shape, 1.3)
    s = FluidState(mesh, rho, rho * const_u * np.ones(mesh.shape), 0.0)
    s0 = s
    for _ in range(30):
        s = step(s, params, visc, cfg.gas)
    same = np.array_equal(s.rho, s0.rho) and np.array_equal(s.mom, s0.mom)
    return same, f"30 steps on a constant state, bit-exact={same}"


def _riemann(cfg: RunConfig):
    space = ProbabilityBox(1)
    fs = {"w^2": lambda w: w[0] ** 2, "kink": lambda w: abs(w[0] - 0.4),
          "indicator": lambda w: float(w[0] >= 1 / 3)}
    worst = []
    ok = True
    for name, f in fs.items():
        errs = []
        for k in range(2, 7):
            p = build_partition(space, 2**k)
            errs.append(lq_error(interpolate(f, p, choose_nodes(p)), f).value)
        ok &= all(b < a for a, b in zip(errs, errs[1:]))
        worst.append(f"{name} {errs[-1]:.2e}")
    return ok, "decreasing errors, finest " + ", ".join(worst)


def _degenerate_ensemble(cfg: RunConfig):
    from .ensemble import field_statistics, run_collocation

    mesh = TorusMesh(cfg.mesh.dim, 8, cfg.mesh.domain_length)
    model = FourierModel(dim=mesh.dim, param_dim=2, rho_slope=0.0, u_slope=0.0,
                         mu=LevelFunction((0.1,)))
    p = build_partition(ProbabilityBox(2), 2)
    params = cfg.scheme_for(mesh)
    T = 4 * params.dt
    sol = run_collocation(model, p, choose_nodes(p), mesh, params, cfg.gas, T)
    st = field_statistics(sol, [T], cfg.gas)
    ref = sol.results[0].trajectory.at(T)
    same = all(np.array_equal(r.trajectory.at(T).rho, ref.rho) for r in sol.results)
    var = float(max(st.rho_var.max(), st.u_var.max()))
    dev = float(np.max(np.abs(st.rho_mean[0] - ref.rho)))
    return same and var <= 1e-15 and dev <= 1e-14, f"max variance {var:.1e}, mean deviation {dev:.1e}"


def _round_trip(cfg: RunConfig):
    rng = np.random.default_rng(4)
    mesh = TorusMesh(2, 3)
    ok = True
    with tempfile.TemporaryDirectory() as tmp:
        for shape in (mesh.shape, (2,) + mesh.shape):
            v = rng.standard_normal(shape) * 10.0 ** rng.integers(-300, 300, shape)
            path = write_field(v, mesh, Path(tmp) / "f.txt")
            _, back = read_field(path)
            ok &= back.shape == v.shape and np.array_equal(back, v)
    return ok, f"bit-exact round trip={ok}"


CHECKS: dict[str, Callable[[RunConfig], tuple[bool, str]]] = {
    "flux_oracle": _flux_oracle,
    "operator_duality": _duality,
    "discrete_totals": _totals,
    "mass_and_positivity": _mass_positivity,
    "energy_inequality": _energy,
    "constant_state_fixed_point": _fixed_point,
    "riemann_interpolation": _riemann,
    "degenerate_ensemble": _degenerate_ensemble,
    "field_round_trip": _round_trip,
}


def run_checks(cfg: RunConfig | None = None, echo: Callable[[str], None] | None = None) -> list[CheckResult]:
    cfg = cfg if cfg is not None else parse_config({})
    out = []
    for name, fn in CHECKS.items():
        t0 = time.perf_counter()
        try:
            passed, detail = fn(cfg)
        except Exception as exc:  # a crashing check is a failing check
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        res = CheckResult(name, bool(passed), detail, time.perf_counter() - t0)
        out.append(res)
        if echo:
            echo(res.line())
    return out
