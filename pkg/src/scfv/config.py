"""Run configuration: YAML with sections mesh, gas, scheme, data, collocation, run, study.

Every section and key is optional; missing keys take the values in
:data:`DEFAULTS`.  All violations are collected and
reported together as ``ConfigError.problems`` (``"section.key: message"``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .constitutive import GasParams
from .mesh import TorusMesh
from .models import FourierModel, LevelFunction
from .probability import ProbabilityBox, build_partition, choose_nodes
from .solver import SchemeParams

__all__ = ["ConfigError", "StudyLevel", "RunConfig", "load_config", "parse_config", "DEFAULTS"]

DEFAULTS = {
    "mesh": {"dim": 2, "cells": 16, "length": 1.0},
    "gas": {"a": 1.0, "gamma": 1.4},
    "scheme": {"cfl": 0.1, "eps": 1.0, "picard_tol": 1e-10, "picard_max_iter": 50,
               "tol_energy": 1e-8},
    "data": {"family": "fourier", "param_dim": 2, "rho_mean": 1.0, "rho_amp": 0.2,
             "rho_slope": 0.1, "u_amp": 0.5, "u_slope": 0.2, "phase_shift": 0.0,
             "mu": {"levels": [0.1], "breaks": [], "axis": 0},
             "eta": {"levels": [0.0], "breaks": [], "axis": 0},
             "mu_min": 1e-8, "omega": None},
    "collocation": {"cells_per_axis": 2, "nodes": "midpoint", "seed": None},
    "run": {"T_final": 0.1, "output_times": None, "output_dir": "output", "workers": 1},
    "study": {"levels": [{"cells_per_axis": 2, "cells": 8},
                         {"cells_per_axis": 4, "cells": 16},
                         {"cells_per_axis": 8, "cells": 32}]},
}

NODE_RULES = ("midpoint", "corner", "random")


class ConfigError(ValueError):
    def __init__(self, problems: list[str], source: str = "<config>"):
        self.problems = list(problems)
        self.source = source
        super().__init__(f"{source}: " + "; ".join(self.problems))


@dataclass(frozen=True)
class StudyLevel:
    cells_per_axis: int
    cells: int


@dataclass
class RunConfig:
    raw: dict
    mesh: TorusMesh
    gas: GasParams
    scheme: SchemeParams
    model: FourierModel
    mu_min: float
    omega: tuple
    cells_per_axis: int
    node_rule: str
    seed: int | None
    T_final: float
    output_times: list[float]
    output_dir: Path
    workers: int
    study: list[StudyLevel] = field(default_factory=list)

    def scheme_for(self, mesh: TorusMesh) -> SchemeParams:
        s = self.raw["scheme"]
        return SchemeParams.for_mesh(mesh, s["cfl"], s["eps"], s["picard_tol"],
                                     s["picard_max_iter"], s["tol_energy"])

    def mesh_for(self, cells: int) -> TorusMesh:
        return TorusMesh(self.mesh.dim, cells, self.mesh.domain_length)

    def partition(self, cells_per_axis: int | None = None):
        space = ProbabilityBox(self.model.param_dim)
        p = build_partition(space, cells_per_axis or self.cells_per_axis)
        return p, choose_nodes(p, self.node_rule, self.seed)


def _merge(defaults: dict, given: dict, path: str, problems: list[str]) -> dict:
    out = {}
    for key in given:
        if key not in defaults:
            problems.append(f"{path}{key}: unknown key")
    for key, dv in defaults.items():
        gv = given.get(key, dv)
        if isinstance(dv, dict) and key in given:
            if not isinstance(gv, dict):
                problems.append(f"{path}{key}: expected a mapping")
                gv = dv
            else:
                gv = _merge(dv, gv, f"{path}{key}.", problems)
        out[key] = gv
    return out


def _num(cfg, sec, key, problems, kind=float):
    v = cfg[sec][key]
    ok = isinstance(v, (int, float)) and not isinstance(v, bool)
    if kind is int:
        ok = ok and float(v).is_integer()
    if not ok:
        problems.append(f"{sec}.{key}: expected {'an integer' if kind is int else 'a number'}, got {v!r}")
        return None
    return kind(v)


def _level(item, path, problems):
    try:
        return LevelFunction(tuple(float(x) for x in item["levels"]),
                             tuple(float(x) for x in item["breaks"]), int(item["axis"]))
    except (TypeError, ValueError) as exc:
        problems.append(f"{path}: {exc}")
        return None


def parse_config(data, source: str = "<config>") -> RunConfig:
    """Validate a nested mapping and build a :class:`RunConfig`."""
    problems: list[str] = []
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(["top level must be a mapping of sections"], source)
    cfg = _merge(DEFAULTS, data, "", problems)

    dim = _num(cfg, "mesh", "dim", problems, int)
    cells = _num(cfg, "mesh", "cells", problems, int)
    length = _num(cfg, "mesh", "length", problems)
    if dim is not None and dim not in (2, 3):
        problems.append(f"mesh.dim: must be 2 or 3, got {dim}")
    if cells is not None and cells < 2:
        problems.append(f"mesh.cells: must be >= 2, got {cells}")
    if length is not None and not length > 0:
        problems.append(f"mesh.length: must be positive, got {length}")
    if None not in (cells, length) and cells >= 2 and length > 0 and not length / cells < 1:
        problems.append(f"mesh: mesh size h = length/cells must be < 1, got {length / cells:g}")

    a = _num(cfg, "gas", "a", problems)
    gamma = _num(cfg, "gas", "gamma", problems)
    if a is not None and not a > 0:
        problems.append(f"gas.a: must satisfy a > 0, got {a}")
    if gamma is not None and not gamma > 1:
        problems.append(f"gas.gamma: must satisfy γ > 1, got {gamma}")

    cfl = _num(cfg, "scheme", "cfl", problems)
    eps = _num(cfg, "scheme", "eps", problems)
    ptol = _num(cfg, "scheme", "picard_tol", problems)
    pmax = _num(cfg, "scheme", "picard_max_iter", problems, int)
    _num(cfg, "scheme", "tol_energy", problems)
    if cfl is not None and not 0 < cfl < 10:
        problems.append(f"scheme.cfl: must satisfy 0 < cfl < 10 (dt = cfl h), got {cfl}")
    if eps is not None and not eps > -1:
        problems.append(f"scheme.eps: must satisfy −1 < ε, got {eps}")
    if ptol is not None and not ptol > 0:
        problems.append(f"scheme.picard_tol: must be positive, got {ptol}")
    if pmax is not None and pmax < 1:
        problems.append(f"scheme.picard_max_iter: must be >= 1, got {pmax}")

    d = cfg["data"]
    if d["family"] != "fourier":
        problems.append(f"data.family: unknown model family {d['family']!r} (available: fourier)")
    N = _num(cfg, "data", "param_dim", problems, int)
    if N is not None and N < 1:
        problems.append(f"data.param_dim: must be >= 1, got {N}")
    for key in ("rho_mean", "rho_amp", "rho_slope", "u_amp", "u_slope", "phase_shift"):
        _num(cfg, "data", key, problems)
    mu_min = _num(cfg, "data", "mu_min", problems)
    if mu_min is not None and not mu_min > 0:
        problems.append(f"data.mu_min: must be positive, got {mu_min}")
    mu = _level(d["mu"], "data.mu", problems)
    eta = _level(d["eta"], "data.eta", problems)
    for name, lf in (("mu", mu), ("eta", eta)):
        if lf is not None and N is not None and not 0 <= lf.axis < max(N, 1):
            problems.append(f"data.{name}.axis: must index a parameter, got {lf.axis}")
    if mu is not None and mu_min is not None and mu.min < mu_min:
        problems.append(f"data.mu: levels must be >= mu_min = {mu_min}, got min {mu.min}")
    if eta is not None and eta.min < 0:
        problems.append(f"data.eta: levels must be >= 0, got min {eta.min}")
    omega = d["omega"]
    if omega is None and N is not None:
        omega = [0.5] * max(N, 1)
    if omega is not None and (not isinstance(omega, list) or (N is not None and len(omega) != N)
                              or any(not 0 <= float(w) <= 1 for w in omega)):
        problems.append("data.omega: must be a list of param_dim values in [0, 1]")

    c = cfg["collocation"]
    cpa = _num(cfg, "collocation", "cells_per_axis", problems, int)
    if cpa is not None and cpa < 1:
        problems.append(f"collocation.cells_per_axis: must be >= 1, got {cpa}")
    if c["nodes"] not in NODE_RULES:
        problems.append(f"collocation.nodes: must be one of {', '.join(NODE_RULES)}, got {c['nodes']!r}")
    if c["seed"] is not None and not isinstance(c["seed"], int):
        problems.append(f"collocation.seed: must be an integer or null, got {c['seed']!r}")
    if c["nodes"] == "random" and c["seed"] is None:
        problems.append("collocation.seed: the random node rule needs an explicit seed")

    T = _num(cfg, "run", "T_final", problems)
    if T is not None and not T > 0:
        problems.append(f"run.T_final: must be positive, got {T}")
    workers = _num(cfg, "run", "workers", problems, int)
    if workers is not None and workers < 1:
        problems.append(f"run.workers: must be >= 1, got {workers}")
    times = cfg["run"]["output_times"]
    if times is None and T is not None:
        times = [0.0, T]
    if not isinstance(times, list) or (T is not None and any(
            not isinstance(t, (int, float)) or not 0 <= t <= T for t in times)):
        problems.append("run.output_times: must be a list of times in [0, T_final]")

    levels = []
    lv = cfg["study"]["levels"]
    if not isinstance(lv, list) or not lv:
        problems.append("study.levels: must be a non-empty list")
    else:
        for i, item in enumerate(lv):
            try:
                levels.append(StudyLevel(int(item["cells_per_axis"]), int(item["cells"])))
            except (TypeError, KeyError, ValueError):
                problems.append(f"study.levels[{i}]: needs integer cells_per_axis and cells")
        for i, (lo, hi) in enumerate(zip(levels[:-1], levels[1:])):
            if not (hi.cells > lo.cells and hi.cells_per_axis > lo.cells_per_axis):
                problems.append(f"study.levels[{i + 1}]: h and partition diameter must strictly decrease")

    if problems:
        raise ConfigError(problems, source)

    mesh = TorusMesh(dim, cells, length)
    rc = RunConfig(
        raw=cfg,
        mesh=mesh,
        gas=GasParams(a, gamma),
        scheme=SchemeParams.for_mesh(mesh, cfl, eps, ptol, pmax, cfg["scheme"]["tol_energy"]),
        model=FourierModel(dim=dim, param_dim=N, rho_mean=d["rho_mean"], rho_amp=d["rho_amp"],
                           rho_slope=d["rho_slope"], u_amp=d["u_amp"], u_slope=d["u_slope"],
                           phase_shift=d["phase_shift"], mu=mu, eta=eta),
        mu_min=mu_min,
        omega=tuple(float(w) for w in omega),
        cells_per_axis=cpa,
        node_rule=c["nodes"],
        seed=c["seed"],
        T_final=T,
        output_times=[float(t) for t in times],
        output_dir=Path(cfg["run"]["output_dir"]),
        workers=workers,
        study=levels,
    )
    return rc


def load_config(path) -> RunConfig:
    """Read and validate a YAML config file; raises :class:`ConfigError`."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError([f"cannot read config: {exc.strerror}"], str(path)) from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}, column {mark.column + 1}: " if mark else ""
        msg = getattr(exc, "problem", None) or str(exc)
        raise ConfigError([f"parse error at {where}{msg}"], str(path)) from exc
    return parse_config(data, str(path))
