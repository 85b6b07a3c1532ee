"""slabflow: pseudo-spectral primitive-equation solvers on a periodic slab.

The package pairs a compressible solver (barotropic pressure, z-independent
density, explicit acoustic time stepping) with its incompressible limit
(barotropic Leray projection) and measures how fast the former converges to
the latter as the Mach number goes to zero.
"""

from .diagnostics import (
    EnergyReport,
    conservation_report,
    convergence_metrics,
    dissipation_total,
    energy_total,
    fit_log_slope,
    fit_semilog_slope,
    pe_energy_residual,
    perturbation_view,
    psi_z_closed_form,
)
from .cpe import CPETendency, cpe_rhs, cpe_step, diagnose_w_cpe, stable_dt
from .errors import (
    CFLViolation,
    ConfigError,
    DensityOutOfBounds,
    DimensionMismatch,
    NonpositiveDensity,
    NonzeroMeanRHS,
    NonzeroVerticalMean,
    ParityMismatch,
    SlabflowError,
    TimeGridMismatch,
)
from .fields import Parity, SpectralField2, SpectralField3, multiply, to_physical, to_spectral
from .grid import Grid
from .initial import (
    build_initial_states,
    enforce_compatibility,
    initial_energy,
    sample_initial_velocity,
)
from .operators import (
    dealias,
    deriv,
    integrate_z_from_zero,
    parity_project,
    sobolev_norm,
    solve_neg_laplacian_h,
    vertical_average,
)
from .params import Params, Tolerances, residue, sound_speed_sq, validate
from .pe import (
    PETendency,
    diagnose_pressure_rho1,
    diagnose_rho1_t,
    diagnose_w_pe,
    leray_project_barotropic,
    pe_rhs,
    pe_step,
    stable_dt_pe,
)
from .states import CPEState, PEState, PerturbationView

__version__ = "0.1.0"

__all__ = [
    "CFLViolation",
    "ConfigError",
    "CPEState",
    "CPETendency",
    "DensityOutOfBounds",
    "DimensionMismatch",
    "EnergyReport",
    "Grid",
    "NonpositiveDensity",
    "NonzeroMeanRHS",
    "NonzeroVerticalMean",
    "Params",
    "Parity",
    "ParityMismatch",
    "PEState",
    "PETendency",
    "PerturbationView",
    "SlabflowError",
    "SpectralField2",
    "SpectralField3",
    "TimeGridMismatch",
    "Tolerances",
    "build_initial_states",
    "conservation_report",
    "convergence_metrics",
    "cpe_rhs",
    "cpe_step",
    "dealias",
    "deriv",
    "diagnose_pressure_rho1",
    "diagnose_rho1_t",
    "diagnose_w_cpe",
    "diagnose_w_pe",
    "dissipation_total",
    "energy_total",
    "enforce_compatibility",
    "fit_log_slope",
    "fit_semilog_slope",
    "initial_energy",
    "integrate_z_from_zero",
    "leray_project_barotropic",
    "multiply",
    "parity_project",
    "pe_energy_residual",
    "pe_rhs",
    "pe_step",
    "perturbation_view",
    "psi_z_closed_form",
    "residue",
    "sample_initial_velocity",
    "sobolev_norm",
    "solve_neg_laplacian_h",
    "sound_speed_sq",
    "stable_dt",
    "stable_dt_pe",
    "to_physical",
    "to_spectral",
    "validate",
    "vertical_average",
]
