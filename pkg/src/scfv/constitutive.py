"""Isentropic pressure law, pressure potential and the total energy functional."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "GasParams",
    "Viscosity",
    "pressure",
    "pressure_potential",
    "energy",
    "energy_velocity",
    "total_energy",
]


@dataclass(frozen=True)
class GasParams:
    a: float = 1.0
    gamma: float = 1.4

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"pressure coefficient must satisfy a > 0, got a={self.a}")
        if not self.gamma > 1:
            raise ValueError(f"adiabatic exponent must satisfy gamma > 1, got gamma={self.gamma}")


@dataclass(frozen=True)
class Viscosity:
    mu: float
    eta: float = 0.0
    dim: int = 2
    mu_min: float = 1e-8

    def __post_init__(self):
        if not self.mu_min > 0:
            raise ValueError("mu_min must be positive")
        if not self.mu >= self.mu_min:
            raise ValueError(f"shear viscosity mu={self.mu} is below the floor mu_min={self.mu_min}")
        if not self.eta >= 0:
            raise ValueError(f"bulk viscosity must satisfy eta >= 0, got eta={self.eta}")

    @property
    def lam(self) -> float:
        return self.mu / self.dim + self.eta


def _check_density(rho):
    if np.any(np.asarray(rho) < 0):
        raise ValueError("negative density passed to the pressure law")


def pressure(rho, g: GasParams):
    _check_density(rho)
    return g.a * np.power(rho, g.gamma)


def pressure_potential(rho, g: GasParams):
    _check_density(rho)
    return g.a / (g.gamma - 1.0) * np.power(rho, g.gamma)


def energy(rho, m, g: GasParams):
    """Extended-real energy ``1/2 |m|^2/rho + P(rho)``.

    Returns ``0`` at the rest vacuum ``(0, 0)`` and ``inf`` for ``rho = 0,
    m != 0`` or ``rho < 0``.  ``m`` carries its components on axis 0.
    """
    rho = np.asarray(rho, dtype=float)
    m2 = np.sum(np.asarray(m, dtype=float) ** 2, axis=0)
    pos = rho > 0
    safe = np.where(pos, rho, 1.0)
    e = 0.5 * m2 / safe + g.a / (g.gamma - 1.0) * np.power(safe, g.gamma)
    out = np.where(pos, e, np.where((rho == 0) & (m2 == 0), 0.0, np.inf))
    return out[()] if out.ndim == 0 else out


def energy_velocity(rho, u, g: GasParams):
    """``1/2 rho |u|^2 + P(rho)`` for positive density."""
    rho = np.asarray(rho, dtype=float)
    return 0.5 * rho * np.sum(np.asarray(u, dtype=float) ** 2, axis=0) + pressure_potential(rho, g)


def total_energy(mesh, rho, m, g: GasParams) -> float:
    """``sum_K |K| E(rho_K, m_K)``; ``inf`` if any cell is degenerate."""
    return float(mesh.cell_volume * np.sum(energy(rho, m, g)))
