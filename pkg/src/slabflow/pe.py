"""Incompressible primitive-equation solver.

The prognostic variable is the horizontal velocity (Even in z).  The
pressure never appears explicitly: the constraint div_h of the vertical
average = 0 is enforced by a barotropic Leray projection, which on the torus
is exact in Fourier space.  The pressure field itself is recovered on demand
from a horizontal Poisson problem and is used only diagnostically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CFLViolation, NonzeroMeanRHS
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
    deriv,
    deriv2,
    div_h,
    div_h2,
    dzz,
    integrate_z_from_zero,
    laplacian_h,
    solve_neg_laplacian_h,
    vertical_average,
)
from .params import Params, sound_speed_sq
from .states import PEState, max_speed

VPair = tuple[SpectralField3, SpectralField3]


@dataclass(frozen=True)
class PETendency:
    dvx: SpectralField3
    dvy: SpectralField3

    @property
    def dv(self) -> VPair:
        return (self.dvx, self.dvy)


# -- constraint handling -------------------------------------------------------

def leray_project_barotropic(vx: SpectralField3, vy: SpectralField3) -> VPair:
    """Remove the gradient part of the barotropic (m = 0) velocity.

    Replaces vbar by vbar - grad_h(inv_lap_h(div_h vbar)); the baroclinic
    modes are untouched because the pressure is z-independent.  Idempotent,
    and the (0, 0) mode passes through, so the total momentum integral is
    preserved.
    """
    g = vx.grid
    bx = vx.coeffs[:, :, 0]
    by = vy.coeffs[:, :, 0]
    k2 = g.k2h.copy()
    k2[0, 0] = 1.0
    dot = (g.kx2 * bx + g.ky2 * by) / k2
    cx = vx.coeffs.copy()
    cy = vy.coeffs.copy()
    cx[:, :, 0] = bx - g.kx2 * dot
    cy[:, :, 0] = by - g.ky2 * dot
    return (
        SpectralField3(g, vx.parity, cx),
        SpectralField3(g, vy.parity, cy),
    )


def barotropic_divergence_max(vx: SpectralField3, vy: SpectralField3) -> float:
    """Max pointwise |div_h vbar|, the residual of the projection constraint."""
    d = div_h2(vertical_average(vx), vertical_average(vy))
    return float(np.max(np.abs(to_physical(d))))


def diagnose_w_pe(vx: SpectralField3, vy: SpectralField3, tol: float = 1e-10) -> SpectralField3:
    """Vertical velocity w = -int_0^z div_h v dz'.

    Requires div_h of the barotropic velocity to vanish (to ``tol``); the
    sine-series result is Odd and vanishes at integer z exactly.
    """
    return -integrate_z_from_zero(div_h(vx, vy), tol=tol)


# -- right-hand side -----------------------------------------------------------

def advective_term(vx: SpectralField3, vy: SpectralField3, w: SpectralField3) -> VPair:
    """(v . grad_h) v + w dz v with dealiased collocation products."""
    g = vx.grid
    px = to_physical(vx)
    py = to_physical(vy)
    pw = to_physical(w)
    out = []
    for comp in (vx, vy):
        n = (
            px * to_physical(deriv(comp, "x"))
            + py * to_physical(deriv(comp, "y"))
            + pw * to_physical(deriv(comp, "z"))
        )
        out.append(dealias(to_spectral(n, g, Parity.EVEN, validate=False)))
    return (out[0], out[1])


def viscous_term(vx: SpectralField3, vy: SpectralField3, mu: float, lam: float) -> VPair:
    d = div_h(vx, vy)
    fx = mu * laplacian_h(vx) + lam * deriv(d, "x") + dzz(vx)
    fy = mu * laplacian_h(vy) + lam * deriv(d, "y") + dzz(vy)
    return (fx, fy)


def _zero_mean(f: SpectralField3) -> SpectralField3:
    c = f.coeffs.copy()
    c[0, 0, 0] = 0.0
    return SpectralField3(f.grid, f.parity, c)


def pe_rhs(s: PEState, p: Params) -> PETendency:
    """Projected tendency of the horizontal velocity.

    The pressure-gradient term is realized by the barotropic Leray
    projection; the mean of the tendency is zeroed, which only removes
    round-off since every term integrates to zero identically.
    """
    w = diagnose_w_pe(s.vx, s.vy, tol=p.tol.vertical_mean)
    ax, ay = advective_term(s.vx, s.vy, w)
    fx, fy = viscous_term(s.vx, s.vy, p.mu, p.lam)
    inv_rho0 = 1.0 / p.rho0
    dvx = inv_rho0 * fx - ax
    dvy = inv_rho0 * fy - ay
    dvx, dvy = leray_project_barotropic(dvx, dvy)
    return PETendency(_zero_mean(dvx), _zero_mean(dvy))


# -- time stepping --------------------------------------------------------------

def stable_dt_pe(s: PEState, p: Params) -> float:
    """Advective and viscous explicit stability bounds."""
    g = s.grid
    dt = p.cfl_viscous * g.dx_min**2 * p.rho0 / (2.0 * (p.mu + p.lam + 1.0))
    w = diagnose_w_pe(s.vx, s.vy, tol=p.tol.vertical_mean)
    speed = max_speed(s, w)
    if speed > 0.0:
        dt = min(dt, p.cfl_advective * g.dx_min / speed)
    return dt


def pe_step(s: PEState, dt: float, p: Params, check_cfl: bool = True) -> PEState:
    """One explicit SSP-RK3 step; the projection is applied inside every
    stage tendency so the constraint stays at round-off.

    Drivers that derive dt from ``stable_dt_pe`` themselves may pass
    ``check_cfl=False`` to skip the redundant bound evaluation.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    if check_cfl:
        bound = stable_dt_pe(s, p)
        if dt > bound * (1.0 + 1e-9):
            raise CFLViolation(f"dt = {dt:.6g} exceeds stability bound {bound:.6g}")

    def euler(state: PEState, tau: float) -> PEState:
        k = pe_rhs(state, p)
        return PEState(state.vx + tau * k.dvx, state.vy + tau * k.dvy, state.t + tau)

    u1 = euler(s, dt)
    e1 = euler(u1, dt)
    u2 = PEState(
        0.75 * s.vx + 0.25 * e1.vx,
        0.75 * s.vy + 0.25 * e1.vy,
        s.t + 0.5 * dt,
    )
    e2 = euler(u2, dt)
    return PEState(
        (1.0 / 3.0) * s.vx + (2.0 / 3.0) * e2.vx,
        (1.0 / 3.0) * s.vy + (2.0 / 3.0) * e2.vy,
        s.t + dt,
    )


# -- pressure recovery -----------------------------------------------------------

def _require_barotropic_divergence_free(v: VPair, p: Params) -> None:
    residual = barotropic_divergence_max(*v)
    if residual > p.tol.divergence:
        raise NonzeroMeanRHS(
            f"barotropic divergence residual {residual:.3e} exceeds "
            f"{p.tol.divergence:.1e}; incompressibility is broken"
        )


def diagnose_pressure_rho1(v: VPair, p: Params) -> SpectralField2:
    """Recover the pressure from
    -c_s^2 lap_h rho1 = rho0 * int_0^1 div_h(div_h(v x v)) dz, mean rho1 = 0."""
    _require_barotropic_divergence_free(v, p)
    vx, vy = v
    txx = vertical_average(multiply(vx, vx))
    txy = vertical_average(multiply(vx, vy))
    tyy = vertical_average(multiply(vy, vy))
    divdiv = (
        deriv2(deriv2(txx, "x"), "x")
        + 2.0 * deriv2(deriv2(txy, "x"), "y")
        + deriv2(deriv2(tyy, "y"), "y")
    )
    rhs = p.rho0 * divdiv
    return solve_neg_laplacian_h(rhs, sound_speed_sq(p), tol=p.tol.mean_rhs)


def diagnose_rho1_t(v: VPair, dv: VPair, p: Params) -> SpectralField2:
    """Time derivative of the pressure:
    -c_s^2 lap_h rho1_t = 2 rho0 * int_0^1 div_h(div_h(v x v_t)) dz."""
    _require_barotropic_divergence_free(v, p)
    vx, vy = v
    dvx, dvy = dv
    sxx = vertical_average(multiply(vx, dvx))
    sxy = vertical_average(multiply(vx, dvy)) + vertical_average(multiply(vy, dvx))
    syy = vertical_average(multiply(vy, dvy))
    divdiv = (
        deriv2(deriv2(sxx, "x"), "x")
        + deriv2(deriv2(sxy, "x"), "y")
        + deriv2(deriv2(syy, "y"), "y")
    )
    rhs = 2.0 * p.rho0 * divdiv
    return solve_neg_laplacian_h(rhs, sound_speed_sq(p), tol=p.tol.mean_rhs)
