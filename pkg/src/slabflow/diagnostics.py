"""Perturbation functionals, conservation audits, and rate fitting."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cpe import cpe_rhs, diagnose_w_cpe, divide_by_density
from .errors import SlabflowError
from .fields import (
    Parity,
    SpectralField2,
    SpectralField3,
    constant2,
    multiply,
)
from .operators import (
    deriv,
    deriv2,
    div_h,
    integrate_z_from_zero,
    lift_to_3d,
    remove_barotropic,
    sobolev_norm_sq,
)
from .params import Params
from .pe import (
    VPair,
    diagnose_pressure_rho1,
    diagnose_rho1_t,
    diagnose_w_pe,
    pe_rhs,
)
from .states import CPEState, PEState, PerturbationView, require_matched


# -- the perturbation decomposition --------------------------------------------

def perturbation_view(cpe: CPEState, pe: PEState, p: Params) -> PerturbationView:
    """Decompose the compressible state against the incompressible one."""
    require_matched(cpe, pe)
    pe_tend = pe_rhs(pe, p)
    cpe_tend = cpe_rhs(cpe, p)
    rho1 = diagnose_pressure_rho1(pe.v, p)
    rho1_t = diagnose_rho1_t(pe.v, pe_tend.dv, p)

    zeta = cpe.rho - constant2(cpe.grid, p.rho0)
    xi = zeta - (p.eps**2) * rho1
    psi_x = cpe.vx - pe.vx
    psi_y = cpe.vy - pe.vy
    w_eps = diagnose_w_cpe(cpe.rho, cpe.vx, cpe.vy, tol=p.tol.vertical_mean)
    w_p = diagnose_w_pe(pe.vx, pe.vy, tol=p.tol.vertical_mean)
    return PerturbationView(
        xi=xi,
        psi_x=psi_x,
        psi_y=psi_y,
        psi_z=w_eps - w_p,
        zeta=zeta,
        rho1=rho1,
        xi_t=cpe_tend.drho - (p.eps**2) * rho1_t,
        psi_x_t=cpe_tend.dvx - pe_tend.dvx,
        psi_y_t=cpe_tend.dvy - pe_tend.dvy,
        t=pe.t,
    )


def psi_z_closed_form(view: PerturbationView, cpe: CPEState, pe: PEState, p: Params) -> SpectralField3:
    """The vertical perturbation by its own integral identity,
    rho * psi_z = -int_0^z [div_h(rho * psi_tilde) + vtilde_p . grad_h rho] dz',
    used as a cross-check against the difference of diagnosed w's."""
    rho = cpe.rho
    flux_x = multiply(rho, remove_barotropic(view.psi_x))
    flux_y = multiply(rho, remove_barotropic(view.psi_y))
    integrand = div_h(flux_x, flux_y)
    grad_x = lift_to_3d(deriv2(rho, "x"))
    grad_y = lift_to_3d(deriv2(rho, "y"))
    integrand = integrand + multiply(remove_barotropic(pe.vx), grad_x)
    integrand = integrand + multiply(remove_barotropic(pe.vy), grad_y)
    rho_psi_z = -integrate_z_from_zero(integrand, tol=p.tol.vertical_mean)
    return divide_by_density(rho_psi_z, rho, Parity.ODD)


# -- energy and dissipation functionals ------------------------------------------

@dataclass(frozen=True)
class EnergyParts:
    psi_h2: float
    eps_psi_t_l2: float
    xi_h2: float
    xi_t_l2: float

    @property
    def total(self) -> float:
        return self.psi_h2 + self.eps_psi_t_l2 + self.xi_h2 + self.xi_t_l2


def energy_total(view: PerturbationView, p: Params) -> EnergyParts:
    """E(t): H^2 of the velocity perturbation, L^2 of eps times its time
    derivative, H^2 of the density perturbation over eps, L^2 of its time
    derivative.  Quadratically homogeneous and zero only on the zero view."""
    e1 = sobolev_norm_sq(view.psi_x, 2) + sobolev_norm_sq(view.psi_y, 2)
    e2 = (p.eps**2) * (
        sobolev_norm_sq(view.psi_x_t, 0) + sobolev_norm_sq(view.psi_y_t, 0)
    )
    e3 = sobolev_norm_sq(view.xi, 2) / p.eps**2
    e4 = sobolev_norm_sq(view.xi_t, 0)
    return EnergyParts(e1, e2, e3, e4)


@dataclass(frozen=True)
class DissipationParts:
    grad_psi_h2: float
    eps_psi_t_h1: float
    grad_xi_h1: float
    xi_t_l2: float

    @property
    def total(self) -> float:
        return self.grad_psi_h2 + self.eps_psi_t_h1 + self.grad_xi_h1 + self.xi_t_l2


def dissipation_total(view: PerturbationView, p: Params) -> DissipationParts:
    d1 = 0.0
    for comp in (view.psi_x, view.psi_y):
        for axis in ("x", "y", "z"):
            d1 += sobolev_norm_sq(deriv(comp, axis), 2)
    d2 = (p.eps**2) * (
        sobolev_norm_sq(view.psi_x_t, 1) + sobolev_norm_sq(view.psi_y_t, 1)
    )
    d3 = (
        sobolev_norm_sq(deriv2(view.xi, "x"), 1) + sobolev_norm_sq(deriv2(view.xi, "y"), 1)
    ) / p.eps**2
    d4 = sobolev_norm_sq(view.xi_t, 0)
    return DissipationParts(d1, d2, d3, d4)


# -- conservation and energy identities --------------------------------------------

def conservation_report(cpe: CPEState) -> tuple[float, tuple[float, float]]:
    """Mass integral and momentum integral by spectral quadrature."""
    mass = cpe.rho.integral()
    mom_x = multiply(cpe.rho, cpe.vx).integral()
    mom_y = multiply(cpe.rho, cpe.vy).integral()
    return mass, (mom_x, mom_y)


def velocity_l2_sq(v: VPair) -> float:
    return sobolev_norm_sq(v[0], 0) + sobolev_norm_sq(v[1], 0)


def pe_dissipation_rate(s: PEState, p: Params) -> float:
    """mu |grad_h v|^2 + lam |div_h v|^2 + |dz v|^2, integrated over the domain."""
    rate = 0.0
    for comp in s.v:
        rate += p.mu * (
            sobolev_norm_sq(deriv(comp, "x"), 0) + sobolev_norm_sq(deriv(comp, "y"), 0)
        )
        rate += sobolev_norm_sq(deriv(comp, "z"), 0)
    rate += p.lam * sobolev_norm_sq(div_h(s.vx, s.vy), 0)
    return rate


def pe_energy_residual(
    states: list[PEState], dt: float, p: Params
) -> tuple[np.ndarray, float]:
    """Per-step residual of the semi-discrete energy identity
    d/dt (rho0/2 |v|^2) + dissipation = 0, with trapezoidal dissipation.

    The residual is second order in dt per step for the third-order
    integrator, halving dt shrinks it by about four.
    """
    if len(states) < 2:
        raise SlabflowError("need at least two states to form a residual")
    kinetic = [0.5 * p.rho0 * velocity_l2_sq(s.v) for s in states]
    dissipation = [pe_dissipation_rate(s, p) for s in states]
    residuals = np.array(
        [
            (kinetic[n + 1] - kinetic[n]) / dt
            + 0.5 * (dissipation[n] + dissipation[n + 1])
            for n in range(len(states) - 1)
        ]
    )
    return residuals, float(np.max(np.abs(residuals)))


# -- convergence metrics -------------------------------------------------------------

def convergence_metrics(cpe: CPEState, pe: PEState, p: Params) -> tuple[float, float, float]:
    """(H^2 of v_eps - v_p, H^2 of rho_eps - rho0, H^1 of w_eps - w_p)."""
    require_matched(cpe, pe)
    dv = math.sqrt(
        sobolev_norm_sq(cpe.vx - pe.vx, 2) + sobolev_norm_sq(cpe.vy - pe.vy, 2)
    )
    drho = math.sqrt(sobolev_norm_sq(cpe.rho - constant2(cpe.grid, p.rho0), 2))
    w_eps = diagnose_w_cpe(cpe.rho, cpe.vx, cpe.vy, tol=p.tol.vertical_mean)
    w_p = diagnose_w_pe(pe.vx, pe.vy, tol=p.tol.vertical_mean)
    dw = math.sqrt(sobolev_norm_sq(w_eps - w_p, 1))
    return dv, drho, dw


# -- least-squares rate fits -----------------------------------------------------------

def _linear_fit(xs: np.ndarray, ys: np.ndarray) -> tuple[float, float, float]:
    slope, intercept = np.polyfit(xs, ys, 1)
    fitted = slope * xs + intercept
    ss_res = float(np.sum((ys - fitted) ** 2))
    ss_tot = float(np.sum((ys - np.mean(ys)) ** 2))
    if ss_tot <= 1e-30:
        r2 = 1.0 if ss_res <= 1e-30 else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), r2


def fit_log_slope(xs, ys) -> tuple[float, float, float]:
    """Least squares on (log x, log y); returns (slope, intercept, r^2)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size < 2 or xs.size != ys.size:
        raise SlabflowError("need at least two matched points to fit a slope")
    if np.any(xs <= 0.0) or np.any(ys <= 0.0):
        raise SlabflowError("log-log fit requires strictly positive data")
    return _linear_fit(np.log(xs), np.log(ys))


def fit_semilog_slope(ts, ys) -> tuple[float, float, float]:
    """Least squares on (t, log y), for exponential-decay rates."""
    ts = np.asarray(ts, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if ts.size < 2 or ts.size != ys.size:
        raise SlabflowError("need at least two matched points to fit a slope")
    if np.any(ys <= 0.0):
        raise SlabflowError("semilog fit requires strictly positive values")
    return _linear_fit(ts, np.log(ys))


# -- the per-output-time report ---------------------------------------------------------

@dataclass(frozen=True)
class EnergyReport:
    """Everything the harness records at one shared output time."""

    t: float
    E: float
    E_psi_h2: float
    E_eps_psit_l2: float
    E_xi_h2: float
    E_xit_l2: float
    D: float
    mass: float
    momentum_x: float
    momentum_y: float
    pe_l2_sq: float
    conv_h2_v: float
    conv_h2_rho: float
    conv_h1_w: float

    def __post_init__(self) -> None:
        for name, value in self.__dict__.items():
            if not math.isfinite(value):
                raise SlabflowError(f"EnergyReport field {name} is not finite: {value}")
        if self.E < 0.0 or self.D < 0.0:
            raise SlabflowError("energy and dissipation must be nonnegative")

    CSV_COLUMNS = (
        "t",
        "E",
        "E_psi_h2",
        "E_eps_psit_l2",
        "E_xi_h2",
        "E_xit_l2",
        "D",
        "mass",
        "momentum_x",
        "momentum_y",
        "pe_l2_sq",
        "conv_h2_v",
        "conv_h2_rho",
        "conv_h1_w",
    )

    def csv_row(self) -> list[str]:
        return [f"{getattr(self, c):.17g}" for c in self.CSV_COLUMNS]


def build_report(cpe: CPEState, pe: PEState, p: Params) -> EnergyReport:
    view = perturbation_view(cpe, pe, p)
    e = energy_total(view, p)
    d = dissipation_total(view, p)
    mass, (mom_x, mom_y) = conservation_report(cpe)
    conv_v = math.sqrt(sobolev_norm_sq(view.psi_x, 2) + sobolev_norm_sq(view.psi_y, 2))
    conv_rho = math.sqrt(sobolev_norm_sq(view.zeta, 2))
    conv_w = math.sqrt(sobolev_norm_sq(view.psi_z, 1))
    return EnergyReport(
        t=pe.t,
        E=e.total,
        E_psi_h2=e.psi_h2,
        E_eps_psit_l2=e.eps_psi_t_l2,
        E_xi_h2=e.xi_h2,
        E_xit_l2=e.xi_t_l2,
        D=d.total,
        mass=mass,
        momentum_x=mom_x,
        momentum_y=mom_y,
        pe_l2_sq=velocity_l2_sq(pe.v),
        conv_h2_v=conv_v,
        conv_h2_rho=conv_rho,
        conv_h1_w=conv_w,
    )
