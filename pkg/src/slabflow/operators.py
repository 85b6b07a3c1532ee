"""Spectral calculus on the periodic slab.

Derivatives are exact multiplier operations; the z-derivative and the
z-antiderivative exchange Even and Odd parity.  The vertical average of an
Even field over one period equals its average over the half-period [0, 1]
by symmetry, which is what the slab formulas use.
"""

from __future__ import annotations

import numpy as np
import scipy.fft as _fft

from .errors import NonzeroMeanRHS, NonzeroVerticalMean, ParityMismatch
from .fields import (
    Parity,
    SpectralField2,
    SpectralField3,
    _parity_project_coeffs,
)
from .grid import VOLUME, Grid

#: Default absolute tolerance on the pointwise vertical average when
#: inverting d/dz, and on the mean of a Poisson right-hand side.
VERTICAL_MEAN_TOL = 1e-10
MEAN_RHS_TOL = 1e-10


# -- differentiation ----------------------------------------------------------

def deriv(f: SpectralField3, axis: str) -> SpectralField3:
    """Spectral derivative along ``axis`` in {"x", "y", "z"}.

    The z-derivative flips parity (cosine series differentiate to sine
    series and vice versa); horizontal derivatives preserve it.
    """
    g = f.grid
    if axis == "x":
        return SpectralField3(g, f.parity, 1j * g.kx3 * f.coeffs)
    if axis == "y":
        return SpectralField3(g, f.parity, 1j * g.ky3 * f.coeffs)
    if axis == "z":
        flipped = Parity.ODD if f.parity is Parity.EVEN else Parity.EVEN
        return SpectralField3(g, flipped, 1j * g.kz3 * f.coeffs)
    raise ValueError(f"unknown axis {axis!r}")


def deriv2(f: SpectralField2, axis: str) -> SpectralField2:
    g = f.grid
    if axis == "x":
        return SpectralField2(g, 1j * g.kx2 * f.coeffs)
    if axis == "y":
        return SpectralField2(g, 1j * g.ky2 * f.coeffs)
    raise ValueError(f"unknown horizontal axis {axis!r}")


def div_h(vx: SpectralField3, vy: SpectralField3) -> SpectralField3:
    return deriv(vx, "x") + deriv(vy, "y")


def div_h2(vx: SpectralField2, vy: SpectralField2) -> SpectralField2:
    return deriv2(vx, "x") + deriv2(vy, "y")


def laplacian_h(f: SpectralField3) -> SpectralField3:
    return SpectralField3(f.grid, f.parity, -f.grid.k2h[:, :, None] * f.coeffs)


def dzz(f: SpectralField3) -> SpectralField3:
    return SpectralField3(f.grid, f.parity, -(f.grid.kz3**2) * f.coeffs)


# -- vertical structure -------------------------------------------------------

def integrate_z_from_zero(
    f: SpectralField3, tol: float = VERTICAL_MEAN_TOL
) -> SpectralField3:
    """Antiderivative F with dF/dz = f and F(z=0) = 0.

    Requires Even parity and a vanishing pointwise-in-(x, y) vertical
    average: the m = 0 component of f would otherwise contribute a term
    linear in z, which is not periodic.  For an Even input the cosine series
    integrates to a sine series, so F(0) = 0 holds automatically and the
    result is Odd.
    """
    g = f.grid
    if f.parity is not Parity.EVEN:
        raise ParityMismatch("integrate_z_from_zero requires an Even integrand")
    mean_slice = _fft.ifft2(f.coeffs[:, :, 0], norm="forward")
    mean_max = float(np.max(np.abs(mean_slice)))
    if mean_max > tol:
        raise NonzeroVerticalMean(
            f"pointwise vertical average reaches {mean_max:.3e} > tol {tol:.1e}"
        )
    kz = g.kz3.copy()
    kz[0, 0, 0] = 1.0  # placeholder; the m = 0 plane is zeroed below
    kz[kz == 0.0] = 1.0
    out = f.coeffs / (1j * kz)
    out[:, :, g.mz == 0] = 0.0
    return SpectralField3(g, Parity.ODD, out)


def vertical_average(f: SpectralField3) -> SpectralField2:
    """Average over z in [0, 1]; for Even fields this equals the period mean,
    which is the m = 0 coefficient slice."""
    if f.parity is not Parity.EVEN:
        raise ParityMismatch("vertical_average is defined here for Even fields only")
    return SpectralField2(f.grid, f.coeffs[:, :, 0].copy())


def remove_barotropic(f: SpectralField3) -> SpectralField3:
    """The zero-vertical-mean remainder: f minus its vertical average."""
    out = f.coeffs.copy()
    out[:, :, 0] = 0.0
    return SpectralField3(f.grid, f.parity, out)


def lift_to_3d(f: SpectralField2) -> SpectralField3:
    """Embed a horizontal field as a z-independent (Even) 3-D field."""
    coeffs = np.zeros(f.grid.shape3, dtype=complex)
    coeffs[:, :, 0] = f.coeffs
    return SpectralField3(f.grid, Parity.EVEN, coeffs)


# -- projections ----------------------------------------------------------------

def dealias(f: SpectralField3 | SpectralField2) -> SpectralField3 | SpectralField2:
    """Zero every coefficient beyond the 2/3 cutoff in each direction."""
    if isinstance(f, SpectralField2):
        return SpectralField2(f.grid, np.where(f.grid.dealias_mask2, f.coeffs, 0.0))
    return SpectralField3(
        f.grid, f.parity, np.where(f.grid.dealias_mask3, f.coeffs, 0.0)
    )


def parity_project(f: SpectralField3, parity: Parity) -> SpectralField3:
    """Project onto the pure-parity subspace; idempotent."""
    return SpectralField3(
        f.grid, parity, _parity_project_coeffs(f.coeffs, f.grid.flip_z, parity)
    )


# -- norms ----------------------------------------------------------------------

def sobolev_norm_sq(f: SpectralField3 | SpectralField2, s: int) -> float:
    """Squared H^s(Omega) norm via Plancherel.

    The weight is (1 + |k_eff|^2)^s with k_eff = (kx, ky, pi*m); the volume
    factor makes s = 0 reproduce the integral of f^2 over the domain.  A 2-D
    field is measured as its z-independent 3-D extension.
    """
    if s < 0:
        raise ValueError("Sobolev order must be a nonnegative integer")
    g = f.grid
    if isinstance(f, SpectralField2):
        k2 = g.k2h
    else:
        k2 = g.kx3**2 + g.ky3**2 + g.kz3**2
    weight = (1.0 + k2) ** s
    return float(np.sum(weight * np.abs(f.coeffs) ** 2) * VOLUME)


def sobolev_norm(f: SpectralField3 | SpectralField2, s: int) -> float:
    return float(np.sqrt(sobolev_norm_sq(f, s)))


def l2_norm_sq(f: SpectralField3 | SpectralField2) -> float:
    return sobolev_norm_sq(f, 0)


def sobolev_norm_sq_vec(fields, s: int) -> float:
    return float(sum(sobolev_norm_sq(f, s) for f in fields))


# -- horizontal Poisson solve ------------------------------------------------

def solve_neg_laplacian_h(
    rhs: SpectralField2, scale: float, tol: float = MEAN_RHS_TOL
) -> SpectralField2:
    """Solve -scale * Lap_h u = rhs on the torus with zero-mean u.

    Solvability requires a zero-mean right-hand side; a violation signals a
    broken constraint upstream and is reported rather than projected away.
    """
    if scale <= 0.0:
        raise ValueError("scale must be positive")
    mean = abs(rhs.coeffs[0, 0])
    if mean > tol:
        raise NonzeroMeanRHS(
            f"right-hand side mean {mean:.3e} exceeds tolerance {tol:.1e}"
        )
    g = rhs.grid
    k2 = g.k2h.copy()
    k2[0, 0] = 1.0
    out = rhs.coeffs / (scale * k2)
    out[0, 0] = 0.0
    return SpectralField2(g, out)


def grid_for(f: SpectralField3 | SpectralField2) -> Grid:
    return f.grid
