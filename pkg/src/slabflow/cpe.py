"""Compressible primitive-equation solver.

Density is z-independent by representation, so hydrostatic balance holds
exactly; it is advanced with the vertically averaged continuity equation
(a 2-D conservation law) while the vertical velocity is purely diagnostic.
The stiff pressure gradient (Mach number to the -2) is stepped explicitly
under an acoustic CFL restriction dt ~ eps * dx.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CFLViolation, NonpositiveDensity
from .fields import (
    Parity,
    SpectralField2,
    SpectralField3,
    multiply,
    to_physical,
    to_spectral,
)
from .operators import (
    dealias,
    deriv2,
    div_h,
    div_h2,
    integrate_z_from_zero,
    lift_to_3d,
    remove_barotropic,
    vertical_average,
)
from .params import Params
from .pe import VPair, advective_term, viscous_term
from .states import CPEState, max_speed, require_density_in_band


@dataclass(frozen=True)
class CPETendency:
    drho: SpectralField2
    dvx: SpectralField3
    dvy: SpectralField3

    @property
    def dv(self) -> VPair:
        return (self.dvx, self.dvy)


def divide_by_density(
    f: SpectralField3, rho: SpectralField2, parity: Parity
) -> SpectralField3:
    """Pointwise f / rho in physical space.

    Unlike the quadratic products, a quotient is not exactly representable in
    the truncated basis; the result is truncated back to the retained band,
    which is the standard pseudo-spectral approximation.  Dividing by a
    positive z-independent density preserves z-parity pointwise, so the
    projection implied by ``to_spectral`` removes round-off only.
    """
    rho_phys = to_physical(rho)
    if float(rho_phys.min()) <= 0.0:
        raise NonpositiveDensity(f"density minimum {rho_phys.min():.6g} <= 0")
    quotient = to_physical(f) / rho_phys[:, :, None]
    return dealias(to_spectral(quotient, f.grid, parity, validate=False))


def diagnose_w_cpe(
    rho: SpectralField2,
    vx: SpectralField3,
    vy: SpectralField3,
    tol: float = 1e-10,
) -> SpectralField3:
    """Vertical velocity from rho * w = -int_0^z div_h(rho * vtilde) dz'.

    vtilde (the zero-vertical-mean part of v) makes the integrand's vertical
    average vanish identically, so the antiderivative is periodic and w
    vanishes at integer z in the sine representation.
    """
    flux_x = multiply(rho, remove_barotropic(vx))
    flux_y = multiply(rho, remove_barotropic(vy))
    rho_w = -integrate_z_from_zero(div_h(flux_x, flux_y), tol=tol)
    return divide_by_density(rho_w, rho, Parity.ODD)


def pressure_field(rho: SpectralField2, gamma: float) -> SpectralField2:
    """P(rho) = rho^gamma evaluated pointwise and truncated."""
    values = to_physical(rho)
    if float(values.min()) <= 0.0:
        raise NonpositiveDensity(f"density minimum {values.min():.6g} <= 0")
    return dealias(to_spectral(values**gamma, rho.grid))


def cpe_rhs(s: CPEState, p: Params) -> CPETendency:
    """Tendency of (rho, v).

    The density tendency -div_h(rho * vbar) is an exact horizontal
    divergence, so its mean vanishes identically and mass is conserved to
    round-off by construction.  The momentum equation is used in velocity
    form: the advective part needs no density factor while the pressure
    gradient and viscous stress are divided by rho pointwise.
    """
    require_density_in_band(s.rho, p, where="cpe_rhs")
    vbar_x = vertical_average(s.vx)
    vbar_y = vertical_average(s.vy)
    drho = -div_h2(multiply(s.rho, vbar_x), multiply(s.rho, vbar_y))

    w = diagnose_w_cpe(s.rho, s.vx, s.vy, tol=p.tol.vertical_mean)
    ax, ay = advective_term(s.vx, s.vy, w)
    fx, fy = viscous_term(s.vx, s.vy, p.mu, p.lam)

    pressure = pressure_field(s.rho, p.gamma)
    inv_eps2 = 1.0 / p.eps**2
    gx = lift_to_3d(deriv2(pressure, "x"))
    gy = lift_to_3d(deriv2(pressure, "y"))

    dvx = divide_by_density(fx - inv_eps2 * gx, s.rho, Parity.EVEN) - ax
    dvy = divide_by_density(fy - inv_eps2 * gy, s.rho, Parity.EVEN) - ay
    return CPETendency(drho, dvx, dvy)


def stable_dt(s: CPEState, p: Params) -> float:
    """Explicit stability bound: acoustic, advective, viscous.

    The rescaled sound speed is sqrt(gamma * rho^(gamma-1)) / eps, hence the
    acoustic limit proportional to eps * dx.
    """
    g = s.grid
    rho_phys = to_physical(s.rho)
    rho_min = float(rho_phys.min())
    rho_max = float(rho_phys.max())
    if rho_min <= 0.0:
        raise NonpositiveDensity(f"density minimum {rho_min:.6g} <= 0")
    c_max = np.sqrt(p.gamma * rho_max ** (p.gamma - 1.0))
    dt = p.cfl_acoustic * p.eps * g.dx_h / c_max
    dt = min(dt, p.cfl_viscous * g.dx_min**2 * rho_min / (2.0 * (p.mu + p.lam + 1.0)))
    w = diagnose_w_cpe(s.rho, s.vx, s.vy, tol=p.tol.vertical_mean)
    speed = max_speed(s, w)
    if speed > 0.0:
        dt = min(dt, p.cfl_advective * g.dx_min / speed)
    return dt


def cpe_step(s: CPEState, dt: float, p: Params, check_cfl: bool = True) -> CPEState:
    """One explicit SSP-RK3 step with a post-step density-band check."""
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    if check_cfl:
        bound = stable_dt(s, p)
        if dt > bound * (1.0 + 1e-9):
            raise CFLViolation(f"dt = {dt:.6g} exceeds stability bound {bound:.6g}")

    def euler(state: CPEState, tau: float) -> CPEState:
        k = cpe_rhs(state, p)
        return CPEState(
            state.rho + tau * k.drho,
            state.vx + tau * k.dvx,
            state.vy + tau * k.dvy,
            state.t + tau,
        )

    u1 = euler(s, dt)
    e1 = euler(u1, dt)
    u2 = CPEState(
        0.75 * s.rho + 0.25 * e1.rho,
        0.75 * s.vx + 0.25 * e1.vx,
        0.75 * s.vy + 0.25 * e1.vy,
        s.t + 0.5 * dt,
    )
    e2 = euler(u2, dt)
    out = CPEState(
        (1.0 / 3.0) * s.rho + (2.0 / 3.0) * e2.rho,
        (1.0 / 3.0) * s.vx + (2.0 / 3.0) * e2.vx,
        (1.0 / 3.0) * s.vy + (2.0 / 3.0) * e2.vy,
        s.t + dt,
    )
    require_density_in_band(out.rho, p, where="after cpe_step")
    return out
