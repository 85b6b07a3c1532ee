"""Physical and numerical parameters shared by both solvers."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .errors import NonpositiveDensity
from .grid import Grid


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances; every exactness check is overridable."""

    vertical_mean: float = 1e-10   # solvability of the z-antiderivative
    mean_rhs: float = 1e-10        # solvability of the horizontal Poisson solve
    divergence: float = 1e-8       # barotropic-divergence preconditions
    round_trip: float = 1e-12      # transform round trips (verification suite)


@dataclass(frozen=True)
class Params:
    """Fluid constants, Mach number, grid, and time-stepping safety factors.

    The admissible viscosity band 0 < lam < 4*mu < 12*lam is the regime in
    which the limiting system stays globally regular; ``validate`` reports
    every violation instead of raising so a harness can surface all of them.
    """

    rho0: float
    gamma: float
    mu: float
    lam: float
    eps: float
    grid: Grid
    cfl_acoustic: float = 0.5
    cfl_advective: float = 0.3
    cfl_viscous: float = 0.25
    t_end: float = 0.5
    output_stride: int = 50
    tol: Tolerances = field(default_factory=Tolerances)

    def with_eps(self, eps: float) -> "Params":
        return replace(self, eps=eps)


def sound_speed_sq(p: Params) -> float:
    """Squared reference sound speed gamma * rho0^(gamma-1)."""
    return p.gamma * p.rho0 ** (p.gamma - 1.0)


def residue(zeta: float, p: Params) -> float:
    """Second-order remainder of the pressure law at rho0 + zeta.

    Equals rho^gamma - rho0^gamma - c_s^2 * zeta, the closed form of
    gamma*(gamma-1) * integral_{rho0}^{rho} (rho - y) y^(gamma-2) dy.
    It is O(zeta^2) near zero, with Taylor coefficient
    gamma*(gamma-1)*rho0^(gamma-2)/2.
    """
    rho = p.rho0 + zeta
    if rho <= 0.0:
        raise NonpositiveDensity(f"rho0 + zeta = {rho} <= 0")
    return rho**p.gamma - p.rho0**p.gamma - sound_speed_sq(p) * zeta


def validate(p: Params) -> list[str]:
    """Return all parameter-invariant violations (empty list means valid)."""
    problems: list[str] = []
    if not p.rho0 > 0.0:
        problems.append(f"rho0 > 0 required, got {p.rho0}")
    if not p.gamma > 1.0:
        problems.append(f"gamma > 1 required, got {p.gamma}")
    if not p.mu > 0.0:
        problems.append(f"mu > 0 required, got {p.mu}")
    if not p.lam > 0.0:
        problems.append(f"lam > 0 required, got {p.lam}")
    if not p.lam < 4.0 * p.mu:
        problems.append(f"lam < 4*mu required, got lam={p.lam}, 4*mu={4.0 * p.mu}")
    if not 4.0 * p.mu < 12.0 * p.lam:
        problems.append(
            f"4*mu < 12*lam required, got 4*mu={4.0 * p.mu}, 12*lam={12.0 * p.lam}"
        )
    if not 0.0 < p.eps < 1.0:
        problems.append(f"eps in (0, 1) required, got {p.eps}")
    for name in ("cfl_acoustic", "cfl_advective", "cfl_viscous"):
        value = getattr(p, name)
        if not 0.0 < value < 1.0:
            problems.append(f"{name} in (0, 1) required, got {value}")
    if p.t_end < 0.0:
        problems.append(f"t_end >= 0 required, got {p.t_end}")
    if p.output_stride < 1:
        problems.append(f"output_stride >= 1 required, got {p.output_stride}")
    return problems
