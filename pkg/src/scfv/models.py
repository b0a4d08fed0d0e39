"""Random initial data and viscosity families indexed by ``omega`` in ``[0, 1]^N``.

Model callables broadcast: ``x`` has shape ``(d, ...)`` and ``omega`` shape
``(N, ...)``; the trailing shapes combine by numpy broadcasting.  Models are
plain dataclasses so they pickle into worker processes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .probability import NodeSet, Partition

__all__ = ["LevelFunction", "FourierModel", "check_admissible"]

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class LevelFunction:
    """Piecewise-constant function of one coordinate of ``omega``.

    ``levels[j]`` applies on ``breaks[j-1] <= omega[axis] < breaks[j]``.
    A single level gives a constant.
    """

    levels: tuple = (0.1,)
    breaks: tuple = ()
    axis: int = 0

    def __post_init__(self):
        if len(self.levels) != len(self.breaks) + 1:
            raise ValueError("need exactly one more level than breakpoints")
        if list(self.breaks) != sorted(self.breaks):
            raise ValueError("breakpoints must be increasing")

    def __call__(self, omega):
        w = np.asarray(omega, dtype=float)[self.axis]
        out = np.asarray(self.levels, dtype=float)[np.searchsorted(self.breaks, w, side="right")]
        return float(out) if np.ndim(out) == 0 else out

    @property
    def min(self) -> float:
        return float(min(self.levels))

    def straddling_bound(self, p: Partition) -> float:
        """``sum`` over boxes cut by a breakpoint of ``P[box] * (level gap in that box)``."""
        total = 0.0
        for m in range(p.nu):
            lo, hi = p.lower[m, self.axis], p.upper[m, self.axis]
            inside = [b for b in self.breaks if lo < b < hi]
            if inside:
                vals = [self(np.full(p.param_dim, v)) for v in (lo, *inside, np.nextafter(hi, lo))]
                total += p.measures[m] * (max(vals) - min(vals))
        return total

    def exact_interpolation_error(self, p: Partition, nodes: NodeSet, q: float = 1.0) -> float:
        """``E|f^M - f|^q`` computed interval by interval (uniform density only)."""
        if not p.space.is_uniform:
            raise ValueError("exact interpolation error is available for the uniform density only")
        edges = np.concatenate([[-np.inf], np.asarray(self.breaks, float), [np.inf]])
        total = 0.0
        for m in range(p.nu):
            lo, hi = p.lower[m, self.axis], p.upper[m, self.axis]
            other = p.measures[m] / (hi - lo)
            node_val = self(nodes.points[m])
            for j, lev in enumerate(self.levels):
                length = max(0.0, min(hi, edges[j + 1]) - max(lo, edges[j]))
                total += other * length * abs(lev - node_val) ** q
        return total


@dataclass(frozen=True)
class FourierModel:
    """Single-mode Fourier data with amplitudes affine in ``omega``.

    density   rho0 = rho_mean + A_rho(omega) sin(2 pi (x1 + phase_shift omega_0)) sin(2 pi x2) [cos(2 pi x3)]
    velocity  u0   = A_u(omega) (sin 2 pi x2, cos 2 pi x1 [, sin 2 pi (x1 + x2)])
    momentum  m0   = rho0 u0

    with ``A_rho = rho_amp + rho_slope (omega_0 - 1/2)`` and
    ``A_u = u_amp + u_slope (omega_{1 mod N} - 1/2)``.
    """

    dim: int = 2
    param_dim: int = 2
    rho_mean: float = 1.0
    rho_amp: float = 0.2
    rho_slope: float = 0.1
    u_amp: float = 0.5
    u_slope: float = 0.2
    phase_shift: float = 0.0
    mu: LevelFunction = field(default_factory=lambda: LevelFunction((0.1,)))
    eta: LevelFunction = field(default_factory=lambda: LevelFunction((0.0,)))

    def rho_amplitude(self, omega):
        return self.rho_amp + self.rho_slope * (np.asarray(omega, float)[0] - 0.5)

    def u_amplitude(self, omega):
        return self.u_amp + self.u_slope * (np.asarray(omega, float)[1 % self.param_dim] - 0.5)

    def rho0(self, x, omega):
        x = np.asarray(x, float)
        w = np.asarray(omega, float)
        shape = np.sin(TWO_PI * (x[0] + self.phase_shift * w[0])) * np.sin(TWO_PI * x[1])
        if self.dim == 3:
            shape = shape * np.cos(TWO_PI * x[2])
        return self.rho_mean + self.rho_amplitude(w) * shape

    def u0(self, x, omega):
        x = np.asarray(x, float)
        amp = self.u_amplitude(omega)
        comps = [np.sin(TWO_PI * x[1]), np.cos(TWO_PI * x[0])]
        if self.dim == 3:
            comps.append(np.sin(TWO_PI * (x[0] + x[1])))
        return np.stack(np.broadcast_arrays(*[amp * c for c in comps]))

    def m0(self, x, omega):
        return self.rho0(x, omega) * self.u0(x, omega)

    def initial_data(self, omega):
        """Deterministic ``(rho0, m0)`` callables of ``x`` at a fixed ``omega``."""
        w = np.asarray(omega, float)
        return _Bound(self.rho0, w), _Bound(self.m0, w)


@dataclass(frozen=True)
class _Bound:
    fun: object
    omega: np.ndarray

    def __call__(self, x):
        x = np.asarray(x, float)
        w = self.omega.reshape((-1,) + (1,) * (x.ndim - 1))
        return self.fun(x, w)


def check_admissible(model, mu_min: float, samples: int = 64, seed: int = 0,
                     grid: int = 16) -> list[str]:
    """Spot-check admissibility on a seeded sample of ``omega``; returns violations."""
    rng = np.random.default_rng(seed)
    omegas = np.concatenate([rng.random((samples, model.param_dim)),
                             np.zeros((1, model.param_dim)), np.ones((1, model.param_dim))])
    c = (np.arange(grid) + 0.5) / grid
    x = np.array(np.meshgrid(*([c] * model.dim), indexing="ij"))
    problems = []
    for w in omegas:
        rho_fn, _ = model.initial_data(w)
        rmin = float(np.min(rho_fn(x)))
        if not rmin > 0:
            problems.append(f"rho0(., omega={w.tolist()}) has min {rmin:.4g} <= 0")
        mu = model.mu(w)
        if not mu >= mu_min:
            problems.append(f"mu(omega={w.tolist()}) = {mu} below mu_min = {mu_min}")
        if not model.eta(w) >= 0:
            problems.append(f"eta(omega={w.tolist()}) is negative")
    return problems
