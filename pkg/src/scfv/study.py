"""Refinement study: collocation solutions on a sequence of (partition, mesh) levels.

Per level the table records data-interpolation errors, the expected absolute
consistency defects over the nodes, the boundedness statistic Lambda and the
expectation-weighted Cauchy differences to the next level.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import RunConfig, StudyLevel
from .consistency import consistency_residual, separable_scalar, separable_vector
from .constitutive import Viscosity
from .ensemble import (CollocationSolution, boundedness_statistic, cauchy_difference,
                       data_interpolation_error, run_collocation)

__all__ = ["STUDY_COLUMNS", "StudyResult", "run_study", "default_test_functions"]

STUDY_COLUMNS = ("level", "cells_per_axis", "nu", "diam", "cells", "h", "err_rho0", "err_m0",
                 "err_energy0", "err_mu", "e1", "e2", "Lambda", "cauchy_rho", "cauchy_u")


def default_test_functions(T: float, dim: int):
    """Fixed smooth test functions vanishing at ``T`` used for the defects."""
    wave = (1, 1, 0)[:dim]
    phi = separable_scalar(T, wave, 0.3)
    waves = [tuple(int(i == a) for i in range(dim)) for a in range(dim)]
    bphi = separable_vector(T, waves, [0.2, 0.5, 0.7][:dim])
    return phi, bphi


@dataclass
class StudyResult:
    rows: list[dict] = field(default_factory=list)
    solutions: list[CollocationSolution] = field(default_factory=list)

    def column(self, name: str) -> list:
        return [r[name] for r in self.rows]


def _expected_defects(sol: CollocationSolution, cfg: RunConfig):
    # the last time level may overshoot T_final; test functions vanish at the true end
    T = sol.results[0].trajectory.end_time
    phi, bphi = default_test_functions(T, sol.mesh.dim)
    e1 = e2 = 0.0
    for w, res in zip(sol.weights, sol.results):
        visc = Viscosity(res.mu, res.eta, sol.mesh.dim, cfg.mu_min)
        rho0, m0 = cfg.model.initial_data(res.omega)
        rep = consistency_residual(res.trajectory, phi, bphi, cfg.gas, visc, rho0, m0)
        e1 += w * abs(rep.e1)
        e2 += w * abs(rep.e2)
    return float(e1), float(e2)


def run_study(cfg: RunConfig, levels: list[StudyLevel] | None = None, workers: int = 1,
              keep_solutions: bool = False, echo=None) -> StudyResult:
    levels = levels if levels is not None else cfg.study
    T = cfg.T_final
    out = StudyResult()
    prev = None
    for i, lv in enumerate(levels):
        mesh = cfg.mesh_for(lv.cells)
        params = cfg.scheme_for(mesh)
        p, nodes = cfg.partition(lv.cells_per_axis)
        sol = run_collocation(cfg.model, p, nodes, mesh, params, cfg.gas, T,
                              mu_min=cfg.mu_min, workers=workers)
        de = data_interpolation_error(cfg.model, p, nodes, mesh, cfg.gas)
        e1, e2 = _expected_defects(sol, cfg)
        row = {"level": i, "cells_per_axis": lv.cells_per_axis, "nu": p.nu, "diam": p.diam,
               "cells": lv.cells, "h": mesh.h, "err_rho0": de.rho, "err_m0": de.mom,
               "err_energy0": de.energy, "err_mu": de.mu, "e1": e1, "e2": e2,
               "Lambda": boundedness_statistic(sol), "cauchy_rho": None, "cauchy_u": None}
        if prev is not None:
            c_rho, c_u = cauchy_difference(prev, sol, cfg.gas.gamma, T)
            out.rows[-1]["cauchy_rho"], out.rows[-1]["cauchy_u"] = c_rho, c_u
        out.rows.append(row)
        if echo:
            echo(f"level {i}: {lv.cells_per_axis} boxes/axis, {lv.cells} cells/axis, "
                 f"Lambda {row['Lambda']:.6g}")
        if keep_solutions:
            out.solutions.append(sol)
        prev = sol
    return out


def is_decreasing(values) -> bool:
    v = [x for x in values if x is not None]
    return all(b < a for a, b in zip(v, v[1:]))


def growth(values) -> np.ndarray:
    v = np.asarray(values, float)
    return v[1:] / v[:-1] - 1.0
