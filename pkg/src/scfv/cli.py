"""Command-line driver: ``scfv solve|ensemble|study|verify``.

Exit status 0 on success, 1 on validation failure (bad config, inadmissible
data, failed verification check), 2 on solver failure.  Failures also print
a one-line JSON summary to stderr.  ``SCFV_OUTPUT_DIR`` overrides the output
directory of the config.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import io
from .config import ConfigError, RunConfig, load_config, parse_config
from .constitutive import Viscosity
from .ensemble import CollocationFailure, field_statistics, run_collocation
from .solver import LEDGER_COLUMNS, AdmissibilityError, SolverError, init_state, run
from .study import STUDY_COLUMNS, run_study
from .verify import run_checks

__all__ = ["main", "cmd_solve", "cmd_ensemble", "cmd_study", "cmd_verify", "OUTPUT_ENV"]

OUTPUT_ENV = "SCFV_OUTPUT_DIR"
EXIT_OK, EXIT_INVALID, EXIT_SOLVER = 0, 1, 2

STATS_COLUMNS = ("time", "energy_mean", "energy_var", "variance_clamp", "Lambda")
NODE_COLUMNS = ("node", "omega", "weight", "mu", "eta", "rho_Linf", "u_Linf")


class _Failure(Exception):
    def __init__(self, code: int, kind: str, message: str, **extra):
        super().__init__(message)
        self.code, self.kind, self.extra = code, kind, extra


def _output_dir(cfg: RunConfig, sub: str) -> Path:
    base = Path(os.environ.get(OUTPUT_ENV) or cfg.output_dir)
    out = base / sub
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load(path) -> RunConfig:
    try:
        return load_config(path) if path else parse_config({})
    except ConfigError as exc:
        raise _Failure(EXIT_INVALID, "config", str(exc), problems=exc.problems) from exc


def _config_doc(cfg: RunConfig) -> dict:
    # worker count and output location must not change the artifacts
    doc = {k: dict(v) for k, v in cfg.raw.items()}
    doc["run"].pop("workers", None)
    doc["run"].pop("output_dir", None)
    return doc


def _time_tag(t: float) -> str:
    return f"{t:.6f}".replace(".", "p")


def _write_fields(out: Path, mesh, items) -> list[str]:
    names = []
    for name, values in items:
        io.write_field(values, mesh, out / name)
        names.append(name)
    return names


def cmd_solve(cfg: RunConfig) -> dict:
    omega = np.asarray(cfg.omega)
    out = _output_dir(cfg, "solve")
    try:
        visc = Viscosity(cfg.model.mu(omega), cfg.model.eta(omega), cfg.mesh.dim, cfg.mu_min)
        rho0, m0 = cfg.model.initial_data(omega)
        state0 = init_state(rho0, m0, cfg.mesh, cfg.gas)
    except (AdmissibilityError, ValueError) as exc:
        raise _Failure(EXIT_INVALID, "admissibility", str(exc)) from exc
    try:
        traj, ledger = run(state0, cfg.T_final, cfg.scheme, visc, cfg.gas)
    except SolverError as exc:
        raise _Failure(EXIT_SOLVER, type(exc).__name__, str(exc),
                       step=getattr(exc, "step_index", None)) from exc
    io.write_series(ledger.rows, LEDGER_COLUMNS, out / "ledger.csv")
    fields = []
    for t in cfg.output_times:
        s = traj.at(t)
        tag = _time_tag(t)
        fields += _write_fields(out, cfg.mesh, [(f"rho_t{tag}.txt", s.rho), (f"u_t{tag}.txt", s.velocity)])
    summary = {"command": "solve", "omega": list(cfg.omega), "steps": traj.steps, "dt": traj.dt,
               "energy_initial": ledger.energy[0], "energy_final": ledger.energy[-1],
               "mass_drift": float(np.max(np.abs(ledger.mass - ledger.mass[0]))),
               "min_numerical_dissipation": float(np.min(ledger.numerical_dissipation[1:])),
               "energy_inequality_ok": ledger.energy_inequality_holds(cfg.scheme.tol_energy),
               "rho_Linf": ledger.rho_linf(), "u_Linf": ledger.u_linf(), "fields": fields}
    io.write_json(summary, out / "summary.json")
    io.write_manifest(out, {"ledger.csv": LEDGER_COLUMNS},
                      {"config": _config_doc(cfg), "field_format": "scfv-field text, cells in C order"})
    return summary


def cmd_ensemble(cfg: RunConfig, workers: int | None = None) -> dict:
    out = _output_dir(cfg, "ensemble")
    p, nodes = cfg.partition()
    try:
        sol = run_collocation(cfg.model, p, nodes, cfg.mesh, cfg.scheme, cfg.gas, cfg.T_final,
                              mu_min=cfg.mu_min, workers=workers or cfg.workers)
    except AdmissibilityError as exc:
        raise _Failure(EXIT_INVALID, "admissibility", str(exc)) from exc
    except CollocationFailure as exc:
        partial = exc.partial
        rows = [_node_row(r, w) for r, w in zip(partial.results, partial.weights)]
        io.write_series(rows, NODE_COLUMNS, out / "nodes_partial.csv")
        raise _Failure(EXIT_SOLVER, "collocation", str(exc), node=exc.node) from exc
    stats = field_statistics(sol, cfg.output_times, cfg.gas)
    rows = [{"time": t, "energy_mean": em, "energy_var": ev, "variance_clamp": stats.clamp,
             "Lambda": stats.Lambda}
            for t, em, ev in zip(stats.times, stats.energy_mean, stats.energy_var)]
    io.write_series(rows, STATS_COLUMNS, out / "stats.csv")
    node_rows = [_node_row(r, w) for r, w in zip(sol.results, sol.weights)]
    io.write_series(node_rows, NODE_COLUMNS, out / "nodes.csv")
    fields = []
    for i, t in enumerate(stats.times):
        tag = _time_tag(t)
        fields += _write_fields(out, cfg.mesh, [
            (f"rho_mean_t{tag}.txt", stats.rho_mean[i]), (f"rho_var_t{tag}.txt", stats.rho_var[i]),
            (f"u_mean_t{tag}.txt", stats.u_mean[i]), (f"u_var_t{tag}.txt", stats.u_var[i])])
    tail = sorted(((r.rho_linf + r.u_linf, r.index) for r in sol.results), reverse=True)[:5]
    summary = {"command": "ensemble", "nu": p.nu, "diam": p.diam, "node_rule": nodes.rule,
               "Lambda": stats.Lambda, "variance_clamp": stats.clamp,
               "largest_node_Linf": [{"node": m, "rho_plus_u_Linf": v} for v, m in tail],
               "fields": fields}
    io.write_json(summary, out / "summary.json")
    io.write_manifest(out, {"stats.csv": STATS_COLUMNS, "nodes.csv": NODE_COLUMNS},
                      {"config": _config_doc(cfg), "field_format": "scfv-field text, cells in C order"})
    return summary


def _node_row(r, w) -> dict:
    return {"node": r.index, "omega": " ".join(repr(float(x)) for x in r.omega), "weight": w,
            "mu": r.mu, "eta": r.eta, "rho_Linf": r.rho_linf, "u_Linf": r.u_linf}


def cmd_study(cfg: RunConfig, levels: int | None = None, workers: int | None = None,
              echo=None) -> dict:
    chosen = cfg.study if levels is None else cfg.study[:levels]
    if levels is not None and not 1 <= levels <= len(cfg.study):
        raise _Failure(EXIT_INVALID, "config",
                       f"--levels must lie in [1, {len(cfg.study)}] for this config")
    out = _output_dir(cfg, "study")
    try:
        res = run_study(cfg, chosen, workers=workers or cfg.workers, echo=echo)
    except AdmissibilityError as exc:
        raise _Failure(EXIT_INVALID, "admissibility", str(exc)) from exc
    except SolverError as exc:
        raise _Failure(EXIT_SOLVER, type(exc).__name__, str(exc)) from exc
    io.write_series(res.rows, STUDY_COLUMNS, out / "study.csv")
    summary = {"command": "study", "levels": len(chosen), "rows": res.rows}
    io.write_json(summary, out / "summary.json")
    io.write_manifest(out, {"study.csv": STUDY_COLUMNS}, {"config": _config_doc(cfg)})
    return summary


def cmd_verify(cfg: RunConfig, echo=print) -> dict:
    results = run_checks(cfg, echo=echo)
    failed = [r.name for r in results if not r.passed]
    summary = {"command": "verify", "passed": len(results) - len(failed), "failed": failed}
    if failed:
        raise _Failure(EXIT_INVALID, "verification", f"{len(failed)} check(s) failed", failed=failed)
    return summary


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="scfv", description="Finite volume collocation solver for "
                                 "random compressible Navier-Stokes data on the torus.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in (("solve", "one deterministic trajectory at data.omega"),
                        ("ensemble", "collocation solution, statistics and Lambda"),
                        ("study", "refinement study over the configured levels")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", required=True, help="YAML config file")
        if name != "solve":
            sp.add_argument("--workers", type=int, default=None, help="worker processes for node solves")
        if name == "study":
            sp.add_argument("--levels", type=int, default=None, help="use the first k study levels")
    vp = sub.add_parser("verify", help="invariant suite, one line per property")
    vp.add_argument("--config", default=None, help="YAML config file (defaults if omitted)")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load(args.config)
        if getattr(args, "workers", None) is not None and args.workers < 1:
            raise _Failure(EXIT_INVALID, "arguments", "--workers must be >= 1")
        if args.command == "solve":
            summary = cmd_solve(cfg)
        elif args.command == "ensemble":
            summary = cmd_ensemble(cfg, args.workers)
        elif args.command == "study":
            summary = cmd_study(cfg, args.levels, args.workers, echo=print)
        else:
            summary = cmd_verify(cfg)
    except _Failure as exc:
        err = {"status": "error", "exit_code": exc.code, "kind": exc.kind, "message": str(exc)}
        err.update(exc.extra)
        print(f"error: {exc}", file=sys.stderr)
        print(json.dumps(err, sort_keys=True, default=str), file=sys.stderr)
        return exc.code
    if args.command == "study":
        for row in summary["rows"]:
            print(" ".join(f"{k}={io.format_value(row[k])}" for k in STUDY_COLUMNS))
    elif args.command != "verify":
        print(json.dumps({k: v for k, v in summary.items() if k != "fields"}, sort_keys=True,
                         default=float))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
