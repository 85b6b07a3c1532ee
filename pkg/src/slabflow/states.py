"""Prognostic state containers and the perturbation decomposition."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DensityOutOfBounds, TimeGridMismatch
from .fields import Parity, SpectralField2, SpectralField3, to_physical
from .params import Params


@dataclass(frozen=True)
class PEState:
    """Incompressible state: horizontal velocity (Even in z) at time t."""

    vx: SpectralField3
    vy: SpectralField3
    t: float

    @property
    def v(self) -> tuple[SpectralField3, SpectralField3]:
        return (self.vx, self.vy)

    @property
    def grid(self):
        return self.vx.grid


@dataclass(frozen=True)
class CPEState:
    """Compressible state: z-independent density and horizontal velocity."""

    rho: SpectralField2
    vx: SpectralField3
    vy: SpectralField3
    t: float

    @property
    def v(self) -> tuple[SpectralField3, SpectralField3]:
        return (self.vx, self.vy)

    @property
    def grid(self):
        return self.rho.grid


@dataclass(frozen=True)
class PerturbationView:
    """The compressible state decomposed against the incompressible one.

    rho = rho0 + eps^2 * rho1 + xi,  v = v_p + psi_h,  w = w_p + psi_z,
    with rho1 the diagnosed incompressible pressure.  Time derivatives are
    evaluated from the semi-discrete right-hand sides, not from differences
    of stored states.
    """

    xi: SpectralField2
    psi_x: SpectralField3
    psi_y: SpectralField3
    psi_z: SpectralField3
    zeta: SpectralField2
    rho1: SpectralField2
    xi_t: SpectralField2
    psi_x_t: SpectralField3
    psi_y_t: SpectralField3
    t: float

    @property
    def psi_h(self) -> tuple[SpectralField3, SpectralField3]:
        return (self.psi_x, self.psi_y)

    @property
    def psi_h_t(self) -> tuple[SpectralField3, SpectralField3]:
        return (self.psi_x_t, self.psi_y_t)


def density_bounds(rho: SpectralField2) -> tuple[float, float]:
    values = to_physical(rho)
    return float(values.min()), float(values.max())


def require_density_in_band(rho: SpectralField2, p: Params, where: str = "") -> None:
    """Enforce the pointwise band rho0/2 < rho < 2*rho0.

    This is a hard runtime check, not a limiter: in the regime of interest the
    density stays near rho0 and silently clipping an excursion would mask an
    instability.
    """
    lo, hi = density_bounds(rho)
    if not (0.5 * p.rho0 < lo and hi < 2.0 * p.rho0):
        suffix = f" ({where})" if where else ""
        raise DensityOutOfBounds(
            f"density range [{lo:.6g}, {hi:.6g}] left "
            f"({0.5 * p.rho0:.6g}, {2.0 * p.rho0:.6g}){suffix}"
        )


def require_matched(cpe: CPEState, pe: PEState, time_tol: float = 1e-12) -> None:
    if cpe.grid != pe.grid:
        raise TimeGridMismatch("states live on different grids")
    if abs(cpe.t - pe.t) > time_tol * max(1.0, abs(pe.t)):
        raise TimeGridMismatch(f"state times differ: {cpe.t} vs {pe.t}")


def velocity_parity_defect(v: tuple[SpectralField3, SpectralField3]) -> float:
    """Largest relative Odd-parity contamination across components."""
    return max(c.parity_defect() for c in v)


def check_even(v: tuple[SpectralField3, SpectralField3]) -> None:
    for c in v:
        if c.parity is not Parity.EVEN:
            raise TimeGridMismatch("horizontal velocity components must be Even in z")


def max_speed(state: PEState | CPEState, w: SpectralField3 | None = None) -> float:
    """Max pointwise speed over the grid, including the vertical component
    when supplied; used by the advective CFL bound."""
    values = [np.abs(to_physical(state.vx)), np.abs(to_physical(state.vy))]
    if w is not None:
        values.append(np.abs(to_physical(w)))
    return float(max(np.max(a) for a in values))
