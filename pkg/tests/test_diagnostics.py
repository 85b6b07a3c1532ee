"""Perturbation functionals, conservation audits, residual series, and fits."""

import math

import numpy as np
import pytest

from slabflow import (
    CPEState,
    Grid,
    Parity,
    PEState,
    build_initial_states,
    conservation_report,
    convergence_metrics,
    cpe_step,
    dissipation_total,
    energy_total,
    enforce_compatibility,
    fit_log_slope,
    fit_semilog_slope,
    pe_energy_residual,
    pe_step,
    perturbation_view,
    psi_z_closed_form,
    sample_initial_velocity,
    stable_dt,
    stable_dt_pe,
    to_spectral,
)
from slabflow.diagnostics import EnergyReport, build_report, velocity_l2_sq
from slabflow.errors import SlabflowError, TimeGridMismatch
from slabflow.fields import constant2
from slabflow.grid import VOLUME
from slabflow.operators import sobolev_norm_sq
from slabflow.states import PerturbationView

from conftest import make_params


def zero_field3(grid):
    return to_spectral(np.zeros(grid.shape3), grid, Parity.EVEN)


def matched_states(grid, p, family="baroclinic-taylor-green", amplitude=1.0):
    v = enforce_compatibility(sample_initial_velocity(family, amplitude, grid))
    return build_initial_states(v, p)


def zero_view(grid):
    from slabflow.fields import zeros2, zeros3

    z3e = zeros3(grid, Parity.EVEN)
    z3o = zeros3(grid, Parity.ODD)
    z2 = zeros2(grid)
    return PerturbationView(
        xi=z2, psi_x=z3e, psi_y=z3e, psi_z=z3o, zeta=z2, rho1=z2,
        xi_t=z2, psi_x_t=z3e, psi_y_t=z3e, t=0.0,
    )


class TestPerturbationView:
    def test_exact_ansatz_inversion(self, grid16, params16):
        pe0, cpe0 = matched_states(grid16, params16)
        view = perturbation_view(cpe0, pe0, params16)
        assert np.max(np.abs(view.xi.coeffs)) < 1e-15
        assert np.max(np.abs(view.psi_x.coeffs)) == 0.0
        assert np.max(np.abs(view.psi_y.coeffs)) == 0.0
        # identical velocities but different densities: the vertical
        # perturbation is genuinely O(eps^2), not zero
        assert np.max(np.abs(view.psi_z.coeffs)) < params16.eps**2

    def test_rest_states_give_zero_view(self, grid16, params16):
        pe0 = PEState(zero_field3(grid16), zero_field3(grid16), 0.0)
        cpe0 = CPEState(
            constant2(grid16, params16.rho0), zero_field3(grid16), zero_field3(grid16), 0.0
        )
        view = perturbation_view(cpe0, pe0, params16)
        for f in (view.xi, view.xi_t):
            assert np.max(np.abs(f.coeffs)) == 0.0
        for f in (view.psi_x, view.psi_y, view.psi_z, view.psi_x_t, view.psi_y_t):
            assert np.max(np.abs(f.coeffs)) == 0.0

    def test_time_mismatch_rejected(self, grid16, params16):
        pe0, cpe0 = matched_states(grid16, params16)
        with pytest.raises(TimeGridMismatch):
            perturbation_view(CPEState(cpe0.rho, cpe0.vx, cpe0.vy, 1.0), pe0, params16)

    def test_psi_z_two_routes_agree(self, grid_small):
        # difference of diagnosed vertical velocities vs the direct integral
        # identity for the perturbation
        from slabflow.harness import advance_pe_to

        p = make_params(grid_small, eps=0.1)
        pe, cpe = matched_states(grid_small, p)
        for _ in range(5):
            cpe = cpe_step(cpe, stable_dt(cpe, p), p, check_cfl=False)
        pe = advance_pe_to(pe, cpe.t, p)
        cpe = CPEState(cpe.rho, cpe.vx, cpe.vy, pe.t)
        view = perturbation_view(cpe, pe, p)
        alt = psi_z_closed_form(view, cpe, pe, p)
        defect = math.sqrt(sobolev_norm_sq(view.psi_z - alt, 0))
        assert defect < 1e-10


class TestEnergyFunctional:
    def test_zero_view(self, grid16, params16):
        e = energy_total(zero_view(grid16), params16)
        assert e.total == 0.0

    def test_single_mode_plancherel_value(self, grid16, params16):
        # psi_h = sin(x) x_hat: every mode carries |k|^2 = 1, so the H^2
        # weight is (1+1)^2 = 4 and E = 4 * ||sin x||_L2^2 = 4 * (|domain|/2).
        x = grid16.meshgrid()[0]
        view = zero_view(grid16)
        psi = to_spectral(np.sin(x), grid16, Parity.EVEN)
        view = PerturbationView(
            xi=view.xi, psi_x=psi, psi_y=view.psi_y, psi_z=view.psi_z,
            zeta=view.zeta, rho1=view.rho1, xi_t=view.xi_t,
            psi_x_t=view.psi_x_t, psi_y_t=view.psi_y_t, t=0.0,
        )
        e = energy_total(view, params16)
        plancherel = 4.0 * (VOLUME / 2.0)
        assert e.psi_h2 == pytest.approx(plancherel, rel=1e-12)
        assert e.total == pytest.approx(plancherel, rel=1e-12)

    def test_quadratic_homogeneity(self, grid16, params16):
        pe0, cpe0 = matched_states(grid16, params16)
        view = perturbation_view(cpe0, pe0, params16)
        doubled = PerturbationView(
            xi=2.0 * view.xi, psi_x=2.0 * view.psi_x, psi_y=2.0 * view.psi_y,
            psi_z=2.0 * view.psi_z, zeta=2.0 * view.zeta, rho1=view.rho1,
            xi_t=2.0 * view.xi_t, psi_x_t=2.0 * view.psi_x_t,
            psi_y_t=2.0 * view.psi_y_t, t=view.t,
        )
        e1 = energy_total(view, params16)
        e2 = energy_total(doubled, params16)
        assert e2.total == pytest.approx(4.0 * e1.total, rel=1e-12)
        d1 = dissipation_total(view, params16)
        d2 = dissipation_total(doubled, params16)
        assert d2.total == pytest.approx(4.0 * d1.total, rel=1e-12)

    def test_dissipation_single_mode(self, grid16, params16):
        # D's leading term is ||grad psi||_H2^2; for sin(x) the only gradient
        # component is cos(x) with the same Plancherel weight.
        x = grid16.meshgrid()[0]
        base = zero_view(grid16)
        psi = to_spectral(np.sin(x), grid16, Parity.EVEN)
        view = PerturbationView(
            xi=base.xi, psi_x=psi, psi_y=base.psi_y, psi_z=base.psi_z,
            zeta=base.zeta, rho1=base.rho1, xi_t=base.xi_t,
            psi_x_t=base.psi_x_t, psi_y_t=base.psi_y_t, t=0.0,
        )
        d = dissipation_total(view, params16)
        assert d.grad_psi_h2 == pytest.approx(4.0 * (VOLUME / 2.0), rel=1e-12)

    def test_nonnegative_and_zero_only_on_zero_view(self, grid16, params16):
        pe0, cpe0 = matched_states(grid16, params16)
        view = perturbation_view(cpe0, pe0, params16)
        e = energy_total(view, params16)
        d = dissipation_total(view, params16)
        assert e.total > 0.0  # time-derivative terms are nonzero here
        assert d.total > 0.0
        z = energy_total(zero_view(grid16), params16)
        assert z.total == 0.0


class TestEnergyResidual:
    def test_rest_trajectory(self, grid16, params16):
        states = [PEState(zero_field3(grid16), zero_field3(grid16), 0.01 * k) for k in range(4)]
        series, worst = pe_energy_residual(states, 0.01, params16)
        assert np.all(series == 0.0)
        assert worst == 0.0

    def test_richardson_second_order(self, grid_small):
        p = make_params(grid_small)
        pe0, _ = matched_states(grid_small, p)
        worsts = []
        for halvings in (0, 1):
            dt = stable_dt_pe(pe0, p) / 2**halvings
            states = [pe0]
            for _ in range(6 * 2**halvings):
                states.append(pe_step(states[-1], dt, p, check_cfl=False))
            _, worst = pe_energy_residual(states, dt, p)
            worsts.append(worst)
        assert worsts[0] / worsts[1] > 3.0

    def test_max_is_max_of_series(self, grid_small):
        p = make_params(grid_small)
        pe0, _ = matched_states(grid_small, p)
        dt = stable_dt_pe(pe0, p)
        states = [pe0]
        for _ in range(4):
            states.append(pe_step(states[-1], dt, p, check_cfl=False))
        series, worst = pe_energy_residual(states, dt, p)
        assert worst == np.max(np.abs(series))

    def test_too_short_history_rejected(self, grid16, params16):
        with pytest.raises(SlabflowError):
            pe_energy_residual([PEState(zero_field3(grid16), zero_field3(grid16), 0.0)], 0.01, params16)


class TestConservationReport:
    def test_uniform_density_mass(self, grid16):
        s = CPEState(constant2(grid16, 1.0), zero_field3(grid16), zero_field3(grid16), 0.0)
        mass, (mx, my) = conservation_report(s)
        assert mass == pytest.approx(8 * np.pi**2, rel=1e-13)
        assert mx == 0.0 and my == 0.0

    def test_momentum_quadrature_oracle(self, grid16):
        # rho = 1 + 0.1 cos x, v = cos(x) x_hat:
        # int rho v_x = 0.1 int cos^2 x = 0.1 |domain| / 2
        x, _, _ = grid16.meshgrid()
        rho = to_spectral(1.0 + 0.1 * np.cos(x[:, :, 0]), grid16)
        vx = to_spectral(np.cos(x), grid16, Parity.EVEN)
        s = CPEState(rho, vx, zero_field3(grid16), 0.0)
        _, (mx, my) = conservation_report(s)
        assert mx == pytest.approx(0.1 * VOLUME / 2.0, rel=1e-12)
        assert abs(my) < 1e-14


class TestConvergenceMetrics:
    def test_identical_states_with_uniform_density(self, grid16, params16):
        v = enforce_compatibility(
            sample_initial_velocity("heat-mode", 0.5, grid16)
        )
        pe0, cpe0 = build_initial_states(v, params16)
        dv, drho, dw = convergence_metrics(cpe0, pe0, params16)
        assert dv == 0.0
        assert drho < 1e-13  # rho1 vanishes for the heat mode
        assert dw < 1e-13

    def test_symmetry_under_swapping_perturbed_field(self, grid16, params16):
        pe0, cpe0 = matched_states(grid16, params16)
        bumped = CPEState(cpe0.rho, 1.1 * cpe0.vx, cpe0.vy, 0.0)
        shrunk = CPEState(cpe0.rho, 0.9 * cpe0.vx, cpe0.vy, 0.0)
        up = convergence_metrics(bumped, pe0, params16)
        down = convergence_metrics(shrunk, pe0, params16)
        assert up[0] == pytest.approx(down[0], rel=1e-10)

    def test_heat_mode_pair_within_time_error(self, grid_small):
        p = make_params(grid_small, eps=0.1)
        pe, cpe = matched_states(grid_small, p, family="heat-mode", amplitude=0.5)
        t_end = 0.05
        from slabflow.harness import advance_cpe_to, advance_pe_to

        pe = advance_pe_to(pe, t_end, p)
        cpe = advance_cpe_to(cpe, t_end, p)
        dv, drho, dw = convergence_metrics(cpe, pe, p)
        assert dv < 1e-6
        assert drho < 1e-10
        assert dw < 1e-10


class TestFits:
    def test_exact_power_laws(self):
        xs = [0.1, 0.05, 0.025, 0.0125]
        slope, _, r2 = fit_log_slope(xs, [3.0 * x for x in xs])
        assert slope == pytest.approx(1.0, abs=1e-12)
        assert r2 == pytest.approx(1.0)
        slope2, _, _ = fit_log_slope(xs, [2.0 * x**2 for x in xs])
        assert slope2 == pytest.approx(2.0, abs=1e-12)

    def test_noisy_slope_recovered(self):
        rng = np.random.default_rng(7)
        xs = np.logspace(-2, 0, 12)
        ys = 5.0 * xs * np.exp(rng.uniform(-0.05, 0.05, xs.size))
        slope, _, r2 = fit_log_slope(xs, ys)
        assert 0.9 < slope < 1.1
        assert r2 > 0.98

    def test_semilog_exponential_decay(self):
        ts = np.linspace(0.0, 2.0, 21)
        ys = 3.0 * np.exp(-1.7 * ts)
        slope, intercept, r2 = fit_semilog_slope(ts, ys)
        assert slope == pytest.approx(-1.7, rel=1e-10)
        assert math.exp(intercept) == pytest.approx(3.0, rel=1e-10)
        assert r2 == pytest.approx(1.0)

    def test_error_paths(self):
        with pytest.raises(SlabflowError):
            fit_log_slope([1.0], [1.0])
        with pytest.raises(SlabflowError):
            fit_log_slope([1.0, -2.0], [1.0, 2.0])
        with pytest.raises(SlabflowError):
            fit_semilog_slope([0.0, 1.0], [1.0, -1.0])


class TestDecayRestated:
    def test_pe_l2_decays_exponentially(self, grid_small):
        # The limit system's velocity decays like exp(-c t); on a short run
        # the semilog fit of the squared norm is a clean negative line.
        p = make_params(grid_small)
        pe, _ = matched_states(grid_small, p)
        ts, ys = [pe.t], [velocity_l2_sq(pe.v)]
        for _ in range(12):
            for _ in range(8):
                pe = pe_step(pe, stable_dt_pe(pe, p), p, check_cfl=False)
            ts.append(pe.t)
            ys.append(velocity_l2_sq(pe.v))
        slope, _, r2 = fit_semilog_slope(ts, ys)
        assert slope < 0.0
        assert r2 > 0.99


class TestEnergyReport:
    def test_build_report_fields_and_csv(self, grid16, params16):
        pe0, cpe0 = matched_states(grid16, params16)
        report = build_report(cpe0, pe0, params16)
        assert report.t == 0.0
        assert report.E >= 0.0 and report.D >= 0.0
        assert report.mass == pytest.approx(8 * np.pi**2, rel=1e-12)
        row = report.csv_row()
        assert len(row) == len(EnergyReport.CSV_COLUMNS)
        # 17 significant digits round-trip exactly through text
        for text, column in zip(row, EnergyReport.CSV_COLUMNS):
            assert float(text) == getattr(report, column)

    def test_nonfinite_rejected(self):
        with pytest.raises(SlabflowError):
            EnergyReport(
                t=0.0, E=math.nan, E_psi_h2=0, E_eps_psit_l2=0, E_xi_h2=0,
                E_xit_l2=0, D=0, mass=0, momentum_x=0, momentum_y=0,
                pe_l2_sq=0, conv_h2_v=0, conv_h2_rho=0, conv_h1_w=0,
            )
