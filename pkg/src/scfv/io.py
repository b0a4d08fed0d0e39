"""Plain-text persistence: cell fields, CSV series and a JSON manifest.

Field files start with a small header and then list one cell per line in
lexicographic (C) index order, every component written with ``repr`` so a
round trip is bit-exact::

    # scfv-field
    dim 2
    cells 3
    length 1.0
    h 0.3333333333333333
    components 1
    1.0
    ...

Nothing time- or host-dependent is written, so identical runs give
byte-identical files.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .mesh import TorusMesh

__all__ = ["write_field", "read_field", "write_series", "format_value", "write_json", "write_manifest",
           "COLUMN_DOCS"]

MAGIC = "# scfv-field"

COLUMN_DOCS = {
    "step": "time level index k",
    "time": "t_k = k dt [time units]",
    "energy": "total energy sum_K |K| E(rho_K, m_K) [energy]",
    "mass": "total mass sum_K |K| rho_K [mass]",
    "dissipation": "dt (mu |grad_D u|^2 + lam |div_h u|^2) of step k [energy]",
    "numerical_dissipation": "E_{k-1} - E_k - dissipation_k, step energy residual [energy]",
    "rho_Linf": "max_K rho_K at level k [density]",
    "u_Linf": "max_K |u_K| at level k [velocity]",
    "picard_iterations": "Picard iterations used for step k [count]",
    "Lambda": "sum_m P[box m] (max rho + max |u|) over all levels [density + velocity]",
    "e1": "continuity consistency defect [mass]",
    "e2": "momentum consistency defect [momentum]",
    "level": "study level index",
    "cells_per_axis": "partition boxes per parameter axis",
    "cells": "mesh cells per space axis",
    "h": "mesh size [length]",
    "diam": "partition box diameter (max side) [parameter units]",
    "nu": "number of partition boxes",
    "err_rho0": "E ||rho0^M - rho0||_{L^gamma} [density]",
    "err_m0": "E ||m0^M - m0||_{L^(2 gamma/(gamma+1))} [momentum]",
    "err_energy0": "|E int E(rho0^M, m0^M) - E int E(rho0, m0)| [energy]",
    "err_mu": "E |mu^M - mu| [viscosity]",
    "cauchy_rho": "E ||rho^l - rho^(l+1)||_{L^gamma((0,T) x torus)}, blank on the last level [density]",
    "cauchy_u": "E ||u^l - u^(l+1)||_{L^2((0,T) x torus)}, blank on the last level [velocity]",
    "energy_mean": "E[total energy] [energy]",
    "energy_var": "Var[total energy] [energy^2]",
    "variance_clamp": "largest negative roundoff variance clamped to 0",
    "node": "collocation node index",
    "omega": "node coordinates in parameter space",
    "mu": "shear viscosity at the node",
    "eta": "bulk viscosity at the node",
    "weight": "probability of the node's box",
}


def format_value(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if v is None:
        return ""
    return str(v)


def write_field(values, mesh: TorusMesh, path) -> Path:
    """Write a scalar ``shape`` or vector ``(d, *shape)`` cell field."""
    path = Path(path)
    v = np.asarray(values, dtype=float)
    if v.shape == mesh.shape:
        comps = v.reshape(1, -1)
    elif v.ndim == mesh.dim + 1 and v.shape[1:] == mesh.shape:
        comps = v.reshape(v.shape[0], -1)
    else:
        raise ValueError(f"field of shape {v.shape} does not fit the {mesh.shape} mesh")
    lines = [MAGIC, f"dim {mesh.dim}", f"cells {mesh.cells_per_dim}",
             f"length {mesh.domain_length!r}", f"h {mesh.h!r}",
             f"components {comps.shape[0]}"]
    lines += [" ".join(repr(float(x)) for x in row) for row in comps.T]
    try:
        path.write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write field to {path}: {exc.strerror}") from exc
    return path


def read_field(path) -> tuple[TorusMesh, np.ndarray]:
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise OSError(f"cannot read field from {path}: {exc.strerror}") from exc
    if not lines or lines[0] != MAGIC:
        raise ValueError(f"{path}: not an scfv field file")
    head = dict(line.split(None, 1) for line in lines[1:6])
    mesh = TorusMesh(int(head["dim"]), int(head["cells"]), float(head["length"]))
    ncomp = int(head["components"])
    data = np.array([[float(x) for x in line.split()] for line in lines[6:]])
    if data.shape != (mesh.cell_count, ncomp):
        raise ValueError(f"{path}: expected {mesh.cell_count} rows of {ncomp} values")
    if ncomp == 1:
        return mesh, data[:, 0].reshape(mesh.shape)
    return mesh, data.T.reshape((ncomp,) + mesh.shape)


def write_series(rows: Iterable[Mapping], columns: Sequence[str], path) -> Path:
    """CSV with a header row; floats in full precision, ``None`` as blank."""
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for row in rows:
                w.writerow([format_value(row.get(c)) for c in columns])
    except OSError as exc:
        raise OSError(f"cannot write series to {path}: {exc.strerror}") from exc
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def write_json(obj, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")
    return path


def write_manifest(out_dir, files: Mapping[str, Sequence[str]], extra: Mapping | None = None) -> Path:
    """``manifest.json`` documenting the columns of every CSV written to ``out_dir``."""
    doc = {"files": {name: {c: COLUMN_DOCS.get(c, "") for c in cols} for name, cols in files.items()}}
    if extra:
        doc.update(extra)
    return write_json(doc, Path(out_dir) / "manifest.json")
