"""Stochastic collocation finite volume solver for the barotropic Navier-Stokes system."""

from .config import load_config
from .constitutive import GasParams, Viscosity
from .ensemble import run_collocation
from .flux import FluxParams
from .mesh import TorusMesh, build_mesh, project
from .models import FourierModel, LevelFunction
from .probability import ProbabilityBox, build_partition, choose_nodes
from .solver import FluidState, SchemeParams, init_state, run, step

__all__ = [
    "FluidState",
    "FluxParams",
    "FourierModel",
    "GasParams",
    "LevelFunction",
    "ProbabilityBox",
    "SchemeParams",
    "TorusMesh",
    "Viscosity",
    "build_mesh",
    "build_partition",
    "choose_nodes",
    "init_state",
    "load_config",
    "project",
    "run",
    "run_collocation",
    "step",
]
