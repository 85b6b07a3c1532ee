"""Parameter invariants, the pressure-law remainder, and the perturbation
reconstruction identity."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from slabflow import Grid, residue, sound_speed_sq, validate
from slabflow.errors import NonpositiveDensity
from slabflow.fields import constant2
from slabflow.states import CPEState, PEState

from conftest import make_params


class TestSoundSpeed:
    @pytest.mark.parametrize(
        "gamma,rho0,expected",
        [(2.0, 1.0, 2.0), (1.4, 1.0, 1.4), (2.0, 2.0, 4.0)],
    )
    def test_direct_evaluation(self, grid8, gamma, rho0, expected):
        p = make_params(grid8, gamma=gamma, rho0=rho0)
        assert sound_speed_sq(p) == pytest.approx(expected)


def residue_quadrature(zeta: float, rho0: float, gamma: float) -> float:
    """The defining integral gamma*(gamma-1) * int_{rho0}^{rho} (rho-y) y^(gamma-2) dy,
    evaluated by adaptive quadrature."""
    rho = rho0 + zeta
    value, _ = quad(lambda y: (rho - y) * y ** (gamma - 2.0), rho0, rho)
    return gamma * (gamma - 1.0) * value


class TestResidue:
    def test_zero_perturbation(self, grid8):
        p = make_params(grid8)
        assert residue(0.0, p) == 0.0

    def test_gamma_two_is_exactly_zeta_squared(self, grid8):
        p = make_params(grid8, gamma=2.0, rho0=1.0)
        zeta = 0.1
        assert residue(zeta, p) == pytest.approx(zeta**2, rel=1e-12)
        assert residue(zeta, p) == pytest.approx(
            residue_quadrature(zeta, 1.0, 2.0), rel=1e-10
        )

    def test_fractional_gamma_against_quadrature(self, grid8):
        p = make_params(grid8, gamma=1.5, rho0=1.0)
        zeta = 0.2
        assert residue(zeta, p) == pytest.approx(
            residue_quadrature(zeta, 1.0, 1.5), rel=1e-10
        )

    def test_nonpositive_density_rejected(self, grid8):
        p = make_params(grid8, rho0=1.0)
        with pytest.raises(NonpositiveDensity):
            residue(-1.0, p)

    def test_quadratic_bound_on_half_band(self, grid8):
        # R(zeta) <= C zeta^2 for |zeta| <= rho0/2 with C from max of
        # gamma*(gamma-1)*y^(gamma-2)/2 over the density range.
        p = make_params(grid8, gamma=1.5, rho0=1.0)
        c_bound = 0.5 * p.gamma * (p.gamma - 1.0) * (0.5 * p.rho0) ** (p.gamma - 2.0)
        for zeta in np.linspace(-0.5, 0.5, 41):
            assert abs(residue(float(zeta), p)) <= c_bound * zeta**2 + 1e-15

    @pytest.mark.parametrize("zeta", [1e-4, 1e-5])
    def test_taylor_coefficient_limit(self, grid8, zeta):
        p = make_params(grid8, gamma=1.5, rho0=2.0)
        taylor = 0.5 * p.gamma * (p.gamma - 1.0) * p.rho0 ** (p.gamma - 2.0)
        assert residue(zeta, p) / zeta**2 == pytest.approx(taylor, rel=1e-3)


@settings(max_examples=40, deadline=None)
@given(zeta=st.floats(min_value=-0.45, max_value=0.45))
def test_residue_sign_and_size_property(zeta):
    p = make_params(Grid(8, 8, 8), gamma=1.7, rho0=1.0)
    value = residue(zeta, p)
    # nonnegative up to cancellation noise in the closed form near zeta = 0
    assert value >= -1e-15
    assert abs(value) <= 2.0 * zeta**2 + 1e-15


class TestValidate:
    def test_reference_parameters_pass(self, grid8):
        assert validate(make_params(grid8, mu=1.0, lam=1.0, gamma=2.0, eps=0.1)) == []

    def test_lambda_exceeding_four_mu(self, grid8):
        problems = validate(make_params(grid8, mu=1.0, lam=5.0))
        assert any("lam < 4*mu" in s for s in problems)

    def test_gamma_boundary(self, grid8):
        problems = validate(make_params(grid8, gamma=1.0))
        assert any("gamma > 1" in s for s in problems)

    def test_eps_out_of_range(self, grid8):
        problems = validate(make_params(grid8, eps=1.5))
        assert any("eps in (0, 1)" in s for s in problems)

    def test_all_violations_reported_together(self, grid8):
        problems = validate(make_params(grid8, gamma=0.5, mu=-1.0, eps=2.0))
        assert len(problems) >= 3


class TestPerturbationReconstruction:
    def test_ansatz_inverts_exactly(self, grid16):
        # rho = rho0 + eps^2 rho1 + xi must be recoverable coefficient by
        # coefficient from the decomposition.
        from slabflow import (
            build_initial_states,
            enforce_compatibility,
            perturbation_view,
            sample_initial_velocity,
        )

        p = make_params(grid16, eps=0.1)
        v = enforce_compatibility(
            sample_initial_velocity("baroclinic-taylor-green", 1.0, grid16)
        )
        pe0, cpe0 = build_initial_states(v, p)
        view = perturbation_view(cpe0, pe0, p)
        reconstructed = (
            constant2(grid16, p.rho0) + (p.eps**2) * view.rho1 + view.xi
        )
        assert np.max(np.abs(reconstructed.coeffs - cpe0.rho.coeffs)) < 1e-12
        assert np.max(np.abs(view.zeta.coeffs - ((p.eps**2) * view.rho1 + view.xi).coeffs)) < 1e-15
