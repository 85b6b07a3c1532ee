"""Configuration-driven experiment runner.

Reads a JSON configuration, runs paired compressible/incompressible
trajectories synchronized at shared output times, sweeps the Mach number,
fits convergence rates, and emits CSV (canonical), JSON summaries, and SVG
plots.  Runs are deterministic: identical configuration and seed produce
byte-identical artifacts.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .cpe import cpe_step, stable_dt
from .diagnostics import (
    EnergyReport,
    build_report,
    conservation_report,
    energy_total,
    fit_log_slope,
    perturbation_view,
    psi_z_closed_form,
    velocity_l2_sq,
)
from .errors import ConfigError, SlabflowError
from .fields import Parity, to_physical, to_spectral
from .grid import Grid
from .initial import build_initial_states, enforce_compatibility, sample_initial_velocity
from .operators import sobolev_norm_sq
from .params import Params, Tolerances, validate
from .pe import pe_step, stable_dt_pe
from .states import CPEState, PEState
from .svgplot import LinePlot

# Sweep pass thresholds.  The convergence-rate window brackets the first-order
# rate the limit theory guarantees as an upper bound; the energy-ratio spread
# tests uniformity of E(t)/eps^2 across the sweep.
CONV_SLOPE_WINDOW = (0.8, 1.2)
CONV_R2_MIN = 0.98
ENERGY_RATIO_SPREAD_MAX = 4.0
EIN_SLOPE_WINDOW = (3.5, 4.5)


# -- configuration ---------------------------------------------------------------

_GRID_KEYS = {"nx", "ny", "nz"}
_TOL_KEYS = {f.name for f in fields(Tolerances)}


@dataclass(frozen=True)
class ExperimentConfig:
    nx: int = 32
    ny: int = 32
    nz: int = 16
    rho0: float = 1.0
    gamma: float = 2.0
    mu: float = 1.0
    lam: float = 1.0
    cfl_acoustic: float = 0.5
    cfl_advective: float = 0.3
    cfl_viscous: float = 0.25
    eps_list: tuple[float, ...] = (0.1, 0.05, 0.025, 0.0125)
    ic_family: str = "baroclinic-taylor-green"
    amplitude: float = 1.0
    t_end: float = 0.5
    output_count: int = 25
    output_stride: int = 50
    out_dir: str = "out"
    seed: int = 0
    tolerances: Tolerances = field(default_factory=Tolerances)

    def __post_init__(self) -> None:
        if not self.eps_list:
            raise ConfigError("eps_list must not be empty")
        for e in self.eps_list:
            if not 0.0 < e < 1.0:
                raise ConfigError(f"every eps must lie in (0, 1), got {e}")
        if any(b >= a for a, b in zip(self.eps_list, self.eps_list[1:])):
            raise ConfigError("eps_list must be strictly decreasing")
        if self.t_end < 0.0:
            raise ConfigError(f"t_end must be nonnegative, got {self.t_end}")
        if self.output_count < 1:
            raise ConfigError(f"output_count must be >= 1, got {self.output_count}")

    @property
    def grid(self) -> Grid:
        return Grid(self.nx, self.ny, self.nz)

    def params(self, eps: float) -> Params:
        return Params(
            rho0=self.rho0,
            gamma=self.gamma,
            mu=self.mu,
            lam=self.lam,
            eps=eps,
            grid=self.grid,
            cfl_acoustic=self.cfl_acoustic,
            cfl_advective=self.cfl_advective,
            cfl_viscous=self.cfl_viscous,
            t_end=self.t_end,
            output_stride=self.output_stride,
            tol=self.tolerances,
        )


def config_from_dict(raw: dict) -> ExperimentConfig:
    """Build a configuration from parsed JSON; unknown keys are errors."""
    known = {f.name for f in fields(ExperimentConfig)} - {"nx", "ny", "nz", "tolerances"}
    kwargs: dict = {}
    for key, value in raw.items():
        if key == "grid":
            extra = set(value) - _GRID_KEYS
            if extra:
                raise ConfigError(f"unknown grid keys: {sorted(extra)}")
            kwargs.update(value)
        elif key == "tolerances":
            extra = set(value) - _TOL_KEYS
            if extra:
                raise ConfigError(f"unknown tolerance keys: {sorted(extra)}")
            kwargs["tolerances"] = Tolerances(**value)
        elif key == "eps_list":
            kwargs["eps_list"] = tuple(float(v) for v in value)
        elif key in known:
            kwargs[key] = value
        else:
            raise ConfigError(f"unknown configuration key: {key!r}")
    return ExperimentConfig(**kwargs)


def load_config(path: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as handle:
        try:
            raw = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"configuration file {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("configuration root must be a JSON object")
    return config_from_dict(raw)


# -- time marching -----------------------------------------------------------------

def advance_pe_to(s: PEState, t_target: float, p: Params) -> PEState:
    """March to t_target, clipping the final substep to land exactly on it."""
    while t_target - s.t > 1e-13 * max(1.0, abs(t_target)):
        dt = min(stable_dt_pe(s, p), t_target - s.t)
        s = pe_step(s, dt, p, check_cfl=False)
    return PEState(s.vx, s.vy, t_target)


def advance_cpe_to(s: CPEState, t_target: float, p: Params) -> CPEState:
    while t_target - s.t > 1e-13 * max(1.0, abs(t_target)):
        dt = min(stable_dt(s, p), t_target - s.t)
        s = cpe_step(s, dt, p, check_cfl=False)
    return CPEState(s.rho, s.vx, s.vy, t_target)


def _output_times(t_end: float, count: int) -> list[float]:
    if t_end == 0.0:
        return [0.0]
    return [t_end * k / count for k in range(count + 1)]


def initial_states(config: ExperimentConfig, eps: float) -> tuple[PEState, CPEState, Params]:
    p = config.params(eps)
    problems = validate(p)
    if problems:
        raise ConfigError("invalid parameters: " + "; ".join(problems))
    v_in = enforce_compatibility(
        sample_initial_velocity(config.ic_family, config.amplitude, config.grid)
    )
    pe0, cpe0 = build_initial_states(v_in, p)
    return pe0, cpe0, p


# -- single-system runs ---------------------------------------------------------------

def run_pe(config: ExperimentConfig, eps: float | None = None) -> list[dict]:
    """Incompressible-only trajectory; one row every ``output_stride`` steps."""
    eps = config.eps_list[0] if eps is None else eps
    pe0, _, p = initial_states(config, eps)
    rows = [_pe_row(pe0, p)]
    s = pe0
    step = 0
    while s.t < config.t_end - 1e-13 * max(1.0, config.t_end):
        dt = min(stable_dt_pe(s, p), config.t_end - s.t)
        s = pe_step(s, dt, p, check_cfl=False)
        step += 1
        if step % config.output_stride == 0 or s.t >= config.t_end - 1e-13:
            rows.append(_pe_row(s, p))
    return rows


def _pe_row(s: PEState, p: Params) -> dict:
    return {
        "t": s.t,
        "l2_sq": velocity_l2_sq(s.v),
        "int_vx": s.vx.integral(),
        "int_vy": s.vy.integral(),
    }


def run_cpe(config: ExperimentConfig, eps: float | None = None) -> list[dict]:
    """Compressible-only trajectory; one row every ``output_stride`` steps."""
    eps = config.eps_list[0] if eps is None else eps
    _, cpe0, p = initial_states(config, eps)
    rows = [_cpe_row(cpe0)]
    s = cpe0
    step = 0
    while s.t < config.t_end - 1e-13 * max(1.0, config.t_end):
        dt = min(stable_dt(s, p), config.t_end - s.t)
        s = cpe_step(s, dt, p, check_cfl=False)
        step += 1
        if step % config.output_stride == 0 or s.t >= config.t_end - 1e-13:
            rows.append(_cpe_row(s))
    return rows


def _cpe_row(s: CPEState) -> dict:
    mass, (mom_x, mom_y) = conservation_report(s)
    return {
        "t": s.t,
        "mass": mass,
        "momentum_x": mom_x,
        "momentum_y": mom_y,
        "l2_sq": velocity_l2_sq(s.v),
    }


# -- paired runs and the sweep -----------------------------------------------------------

def run_pair(
    config: ExperimentConfig, eps: float, collect_states: bool = False
) -> list[EnergyReport] | tuple[list[EnergyReport], list[tuple[CPEState, PEState]]]:
    """Advance both systems with their own stable steps and report at shared
    output times; each system lands exactly on every output time."""
    pe, cpe, p = initial_states(config, eps)
    reports: list[EnergyReport] = []
    snapshots: list[tuple[CPEState, PEState]] = []
    for t_out in _output_times(config.t_end, config.output_count):
        pe = advance_pe_to(pe, t_out, p)
        cpe = advance_cpe_to(cpe, t_out, p)
        reports.append(build_report(cpe, pe, p))
        if collect_states:
            snapshots.append((cpe, pe))
    if collect_states:
        return reports, snapshots
    return reports


@dataclass(frozen=True)
class SweepReport:
    eps: tuple[float, ...]
    series: tuple[tuple[EnergyReport, ...], ...]
    sup_conv_h2_v: tuple[float, ...]
    sup_conv_h2_rho: tuple[float, ...]
    sup_conv_h1_w: tuple[float, ...]
    sup_e: tuple[float, ...]
    sup_xi_h2_over_eps: tuple[float, ...]
    e_in: tuple[float, ...]
    fit_conv_v: tuple[float, float, float]  # slope, intercept, r2
    fit_e_in: tuple[float, float, float]
    energy_ratio_spread: float
    passes: dict

    def summary_dict(self) -> dict:
        return {
            "eps": list(self.eps),
            "sup_conv_h2_v": list(self.sup_conv_h2_v),
            "sup_conv_h2_rho": list(self.sup_conv_h2_rho),
            "sup_conv_h1_w": list(self.sup_conv_h1_w),
            "sup_E": list(self.sup_e),
            "sup_E_over_eps2": [e / x**2 for e, x in zip(self.sup_e, self.eps)],
            "sup_xi_h2_over_eps": list(self.sup_xi_h2_over_eps),
            "E_in": list(self.e_in),
            "E_in_le_eps2": [e <= x**2 for e, x in zip(self.e_in, self.eps)],
            "fit_conv_h2_v": {
                "slope": self.fit_conv_v[0],
                "intercept": self.fit_conv_v[1],
                "r2": self.fit_conv_v[2],
            },
            "fit_E_in": {
                "slope": self.fit_e_in[0],
                "intercept": self.fit_e_in[1],
                "r2": self.fit_e_in[2],
            },
            "energy_ratio_spread": self.energy_ratio_spread,
            "thresholds": {
                "conv_slope_window": list(CONV_SLOPE_WINDOW),
                "conv_r2_min": CONV_R2_MIN,
                "energy_ratio_spread_max": ENERGY_RATIO_SPREAD_MAX,
                "ein_slope_window": list(EIN_SLOPE_WINDOW),
            },
            "pass": dict(self.passes),
        }


def run_sweep(config: ExperimentConfig) -> SweepReport:
    """Run one pair per Mach number and fit the convergence rates.

    Runs are independent and order-insensitive; they are executed serially so
    the artifacts are reproducible bit for bit without scheduler involvement.
    """
    if len(config.eps_list) < 3:
        raise ConfigError("a sweep needs at least 3 Mach numbers to fit rates")
    series = tuple(tuple(run_pair(config, eps)) for eps in config.eps_list)
    return summarize_sweep(config, series)


def summarize_sweep(
    config: ExperimentConfig, series: tuple[tuple[EnergyReport, ...], ...]
) -> SweepReport:
    """Sup-in-time metrics, rate fits, and pass booleans for a finished sweep."""
    if len(series) != len(config.eps_list):
        raise ConfigError("one report series per Mach number is required")

    def sup(get) -> tuple[float, ...]:
        return tuple(max(get(r) for r in reports) for reports in series)

    sup_v = sup(lambda r: r.conv_h2_v)
    sup_rho = sup(lambda r: r.conv_h2_rho)
    sup_w = sup(lambda r: r.conv_h1_w)
    sup_e = sup(lambda r: r.E)
    sup_xi = tuple(
        max(math.sqrt(max(r.E_xi_h2, 0.0)) for r in reports) for reports in series
    )
    e_in = tuple(reports[0].E for reports in series)

    fit_conv_v = fit_log_slope(config.eps_list, sup_v)
    fit_e_in = fit_log_slope(config.eps_list, e_in)
    ratios = [e / x**2 for e, x in zip(sup_e, config.eps_list)]
    spread = max(ratios) / min(ratios) if min(ratios) > 0.0 else math.inf

    passes = {
        "conv_slope_in_window": CONV_SLOPE_WINDOW[0] <= fit_conv_v[0] <= CONV_SLOPE_WINDOW[1],
        "conv_r2": fit_conv_v[2] >= CONV_R2_MIN,
        "uniform_energy_ratio": spread < ENERGY_RATIO_SPREAD_MAX,
        "ein_slope_in_window": EIN_SLOPE_WINDOW[0] <= fit_e_in[0] <= EIN_SLOPE_WINDOW[1],
        "ein_le_eps2": all(e <= x**2 for e, x in zip(e_in, config.eps_list)),
    }
    return SweepReport(
        eps=config.eps_list,
        series=series,
        sup_conv_h2_v=sup_v,
        sup_conv_h2_rho=sup_rho,
        sup_conv_h1_w=sup_w,
        sup_e=sup_e,
        sup_xi_h2_over_eps=sup_xi,
        e_in=e_in,
        fit_conv_v=fit_conv_v,
        fit_e_in=fit_e_in,
        energy_ratio_spread=spread,
        passes=passes,
    )


# -- artifact writers ----------------------------------------------------------------

def _fmt(value: float) -> str:
    return f"{value:.17g}"


def write_pair_csv(path: str, reports: list[EnergyReport]) -> None:
    lines = [",".join(EnergyReport.CSV_COLUMNS)]
    lines += [",".join(r.csv_row()) for r in reports]
    _write_text(path, "\n".join(lines) + "\n")


def write_rows_csv(path: str, rows: list[dict]) -> None:
    if not rows:
        raise SlabflowError("no rows to write")
    columns = list(rows[0].keys())
    lines = [",".join(columns)]
    lines += [",".join(_fmt(row[c]) for c in columns) for row in rows]
    _write_text(path, "\n".join(lines) + "\n")


def write_sweep_outputs(config: ExperimentConfig, report: SweepReport, out_dir: str) -> list[str]:
    """Write per-eps CSVs, the summary JSON, and the SVG plots; returns paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for eps, reports in zip(report.eps, report.series):
        path = os.path.join(out_dir, f"pair_eps_{eps:g}.csv")
        write_pair_csv(path, list(reports))
        paths.append(path)

    summary_path = os.path.join(out_dir, "sweep_summary.json")
    _write_text(summary_path, json.dumps(report.summary_dict(), indent=2) + "\n")
    paths.append(summary_path)

    conv = LinePlot(
        title="Velocity convergence vs Mach number",
        xlabel="eps",
        ylabel="sup_t H2 norm of (v_eps - v_p)",
        logx=True,
        logy=True,
    )
    conv.add(report.eps, report.sup_conv_h2_v, label="measured")
    slope, intercept, _ = report.fit_conv_v
    fitted = [math.exp(intercept) * e**slope for e in report.eps]
    conv.add(report.eps, fitted, label=f"fit slope {slope:.2f}", marker=False)
    conv_path = os.path.join(out_dir, "sweep_convergence.svg")
    _write_text(conv_path, conv.render())
    paths.append(conv_path)

    energy = LinePlot(
        title="Perturbation energy over eps^2",
        xlabel="t",
        ylabel="E(t) / eps^2",
        logy=True,
    )
    for eps, reports in zip(report.eps, report.series):
        ts = [r.t for r in reports]
        ys = [max(r.E, 1e-300) / eps**2 for r in reports]
        energy.add(ts, ys, label=f"eps = {eps:g}", marker=False)
    energy_path = os.path.join(out_dir, "sweep_energy.svg")
    _write_text(energy_path, energy.render())
    paths.append(energy_path)
    return paths


def _write_text(path: str, text: str) -> None:
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)


# -- verification suite ---------------------------------------------------------------

@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _dense_poisson_reference(rhs_values: np.ndarray, scale: float) -> np.ndarray:
    """Dense direct solve of the spectral Poisson operator.

    Builds the full operator matrix from explicit DFT matrices and solves the
    (singular) system by least squares; the minimum-norm solution is the
    zero-mean one.  Shares only the operator definition with the fast path.
    """
    nx, ny = rhs_values.shape
    n = nx * ny
    fx = np.exp(-2j * np.pi * np.outer(np.arange(nx), np.arange(nx)) / nx) / nx
    fy = np.exp(-2j * np.pi * np.outer(np.arange(ny), np.arange(ny)) / ny) / ny
    f2 = np.kron(fx, fy)  # maps row-major grid values to coefficients
    kx = np.rint(np.fft.fftfreq(nx) * nx)
    ky = np.rint(np.fft.fftfreq(ny) * ny)
    k2 = (kx[:, None] ** 2 + ky[None, :] ** 2).reshape(n)
    op = (np.linalg.inv(f2) @ (scale * k2[:, None] * f2)).real
    sol, *_ = np.linalg.lstsq(op, rhs_values.reshape(n), rcond=None)
    sol = sol - sol.mean()
    return sol.reshape(nx, ny)


def run_verification(config: ExperimentConfig) -> list[CheckResult]:
    """Execute the invariant suite: transforms, parity, elliptic oracle,
    conservation, energy identity, and the vertical-velocity cross-check."""
    from . import operators as ops
    from .cpe import cpe_rhs, diagnose_w_cpe
    from .diagnostics import pe_energy_residual
    from .pe import diagnose_pressure_rho1, pe_rhs

    results: list[CheckResult] = []
    tol = config.tolerances
    rng = np.random.default_rng(config.seed)

    def record(name: str, fn) -> None:
        try:
            passed, detail = fn()
        except SlabflowError as exc:
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(name, passed, detail))

    eps0 = config.eps_list[0]

    def check_params():
        problems = validate(config.params(eps0))
        return not problems, "; ".join(problems) if problems else "all invariants hold"

    record("params-valid", check_params)

    grid = Grid(16, 16, 8)

    def check_round_trip():
        samples = rng.standard_normal(grid.shape3)
        samples = 0.5 * (samples + samples[:, :, grid.flip_z])
        f = to_spectral(samples, grid, Parity.EVEN)
        err = float(np.max(np.abs(to_physical(f) - samples)))
        return err <= tol.round_trip, f"max round-trip error {err:.3e}"

    record("transform-round-trip", check_round_trip)

    def check_deriv_parity():
        x, _, z = grid.meshgrid()
        f = to_spectral(np.cos(np.pi * z) * np.cos(x), grid, Parity.EVEN)
        df = ops.deriv(f, "z")
        analytic = -np.pi * np.sin(np.pi * z) * np.cos(x)
        err = float(np.max(np.abs(to_physical(df) - analytic)))
        ok = df.parity is Parity.ODD and err <= 1e-11
        return ok, f"parity {df.parity.value}, max error {err:.3e}"

    record("z-derivative-flips-parity", check_deriv_parity)

    def check_integrate_identity():
        samples = rng.standard_normal(grid.shape3)
        samples = 0.5 * (samples + samples[:, :, grid.flip_z])
        f = ops.dealias(to_spectral(samples, grid, Parity.EVEN))
        f = ops.remove_barotropic(f)
        back = ops.deriv(ops.integrate_z_from_zero(f, tol=tol.vertical_mean), "z")
        err = float(np.max(np.abs(back.coeffs - f.coeffs)))
        return err <= 1e-12, f"max coefficient error {err:.3e}"

    record("vertical-antiderivative-inverts-dz", check_integrate_identity)

    def check_plancherel():
        samples = rng.standard_normal(grid.shape3)
        samples = 0.5 * (samples + samples[:, :, grid.flip_z])
        f = to_spectral(samples, grid, Parity.EVEN)
        from .grid import VOLUME

        quadrature = float(np.mean(samples**2) * VOLUME)
        spectral = ops.sobolev_norm_sq(f, 0)
        rel = abs(spectral - quadrature) / quadrature
        return rel <= 1e-10, f"relative Plancherel defect {rel:.3e}"

    record("plancherel-l2", check_plancherel)

    def check_projections():
        c = rng.standard_normal(grid.shape3) + 1j * rng.standard_normal(grid.shape3)
        from .fields import SpectralField3

        f = SpectralField3(grid, Parity.EVEN, c)
        p1 = ops.parity_project(f, Parity.EVEN)
        p2 = ops.parity_project(p1, Parity.EVEN)
        d1 = ops.dealias(f)
        d2 = ops.dealias(d1)
        comm_a = ops.dealias(ops.parity_project(f, Parity.EVEN))
        comm_b = ops.parity_project(ops.dealias(f), Parity.EVEN)
        err = max(
            float(np.max(np.abs(p1.coeffs - p2.coeffs))),
            float(np.max(np.abs(d1.coeffs - d2.coeffs))),
            float(np.max(np.abs(comm_a.coeffs - comm_b.coeffs))),
        )
        return err == 0.0, f"idempotence/commutation defect {err:.3e}"

    record("dealias-parity-idempotent-commute", check_projections)

    def check_poisson_oracle():
        g8 = Grid(8, 8, 4)
        x, y = g8.meshgrid_h()
        rhs_values = np.cos(x) * np.cos(2 * y) + 0.5 * np.sin(2 * x)
        rhs = to_spectral(rhs_values, g8)
        u = ops.solve_neg_laplacian_h(rhs, 2.0, tol=tol.mean_rhs)
        ref = _dense_poisson_reference(rhs_values, 2.0)
        err = float(np.max(np.abs(to_physical(u) - ref)))
        return err <= 1e-12, f"max dense-oracle error {err:.3e}"

    record("poisson-dense-oracle", check_poisson_oracle)

    p_small = config.params(eps0)

    def make_states():
        v_in = enforce_compatibility(
            sample_initial_velocity(config.ic_family, config.amplitude, config.grid)
        )
        return build_initial_states(v_in, p_small)

    def check_pe_energy():
        pe0, _ = make_states()
        dt = 0.5 * stable_dt_pe(pe0, p_small)

        def trajectory(tau: float, steps: int) -> list[PEState]:
            states = [pe0]
            for _ in range(steps):
                states.append(pe_step(states[-1], tau, p_small, check_cfl=False))
            return states

        coarse_states = trajectory(dt, 8)
        fine_states = trajectory(0.5 * dt, 16)
        _, coarse = pe_energy_residual(coarse_states, dt, p_small)
        _, fine = pe_energy_residual(fine_states, 0.5 * dt, p_small)
        ratio = coarse / max(fine, 1e-300)
        l2 = [velocity_l2_sq(s.v) for s in coarse_states]
        monotone = all(b <= a * (1.0 + 1e-10) + 1e-10 for a, b in zip(l2, l2[1:]))
        mean_drift = max(
            abs(s.vx.integral()) + abs(s.vy.integral()) for s in coarse_states
        )
        # Residual must shrink at least second order under dt halving.
        ok = ratio >= 3.0 and monotone and mean_drift <= 1e-12
        return ok, (
            f"residual {coarse:.3e} -> {fine:.3e} under dt halving "
            f"(ratio {ratio:.2f}), monotone {monotone}, mean drift {mean_drift:.3e}"
        )

    record("pe-energy-identity", check_pe_energy)

    def check_cpe_conservation():
        _, cpe0 = make_states()
        dt = 0.5 * stable_dt(cpe0, p_small)
        s = cpe0
        mass0, _ = conservation_report(s)
        for _ in range(8):
            s = cpe_step(s, dt, p_small, check_cfl=False)
        mass1, _ = conservation_report(s)
        drift = abs(mass1 - mass0) / abs(mass0)
        w = diagnose_w_cpe(s.rho, s.vx, s.vy, tol=tol.vertical_mean)
        wp = to_physical(w)
        boundary = max(
            float(np.max(np.abs(wp[:, :, 0]))),
            float(np.max(np.abs(wp[:, :, w.grid.nz // 2]))),
        )
        parity_defect = max(s.vx.parity_defect(), s.vy.parity_defect())
        ok = drift <= 1e-12 and boundary <= 1e-12 and parity_defect <= 1e-12
        return ok, (
            f"mass drift {drift:.3e}, w boundary {boundary:.3e}, "
            f"parity defect {parity_defect:.3e}"
        )

    record("cpe-mass-and-structure", check_cpe_conservation)

    def check_pressure_consistency():
        pe0, _ = make_states()
        from .operators import deriv2, lift_to_3d
        from .params import sound_speed_sq
        from .pe import advective_term, diagnose_w_pe, viscous_term

        tend = pe_rhs(pe0, p_small)
        rho1 = diagnose_pressure_rho1(pe0.v, p_small)
        w = diagnose_w_pe(pe0.vx, pe0.vy, tol=tol.vertical_mean)
        ax, ay = advective_term(pe0.vx, pe0.vy, w)
        fx, fy = viscous_term(pe0.vx, pe0.vy, p_small.mu, p_small.lam)
        c2 = sound_speed_sq(p_small)
        ref_x = (1.0 / p_small.rho0) * (fx - c2 * lift_to_3d(deriv2(rho1, "x"))) - ax
        ref_y = (1.0 / p_small.rho0) * (fy - c2 * lift_to_3d(deriv2(rho1, "y"))) - ay
        err = max(
            float(np.max(np.abs(tend.dvx.coeffs - ref_x.coeffs))),
            float(np.max(np.abs(tend.dvy.coeffs - ref_y.coeffs))),
        )
        return err <= 1e-12, f"projection vs explicit pressure defect {err:.3e}"

    record("leray-matches-explicit-pressure", check_pressure_consistency)

    def check_psi_z_routes():
        pe0, cpe0 = make_states()
        t_out = 4.0 * stable_dt(cpe0, p_small)
        pe1 = advance_pe_to(pe0, t_out, p_small)
        cpe1 = advance_cpe_to(cpe0, t_out, p_small)
        view = perturbation_view(cpe1, pe1, p_small)
        alt = psi_z_closed_form(view, cpe1, pe1, p_small)
        scale = max(
            math.sqrt(sobolev_norm_sq(view.psi_z, 0)),
            math.sqrt(sobolev_norm_sq(alt, 0)),
            1e-30,
        )
        err = math.sqrt(sobolev_norm_sq(view.psi_z - alt, 0))
        return err <= 1e-10 * max(1.0, scale), f"two-route defect {err:.3e}"

    record("vertical-perturbation-two-routes", check_psi_z_routes)

    def check_heat_mode():
        z = config.grid.meshgrid()[2]
        amp = 0.1
        vx = ops.dealias(to_spectral(amp * np.cos(np.pi * z), config.grid, Parity.EVEN))
        vy = to_spectral(np.zeros(config.grid.shape3), config.grid, Parity.EVEN)
        pe0 = PEState(vx, vy, 0.0)
        t_end = 0.05
        pe1 = advance_pe_to(pe0, t_end, p_small)
        exact = amp * math.exp(-np.pi**2 * t_end / p_small.rho0) * np.cos(np.pi * z)
        err = float(np.max(np.abs(to_physical(pe1.vx) - exact))) / (
            amp * math.exp(-np.pi**2 * t_end / p_small.rho0)
        )
        return err <= 1e-6, f"heat-mode relative error {err:.3e}"

    record("heat-mode-exact-decay", check_heat_mode)

    def check_cpe_rest():
        from .fields import constant2

        rho = constant2(config.grid, p_small.rho0)
        zero = to_spectral(np.zeros(config.grid.shape3), config.grid, Parity.EVEN)
        tend = cpe_rhs(CPEState(rho, zero, zero, 0.0), p_small)
        err = max(
            float(np.max(np.abs(tend.drho.coeffs))),
            float(np.max(np.abs(tend.dvx.coeffs))),
            float(np.max(np.abs(tend.dvy.coeffs))),
        )
        return err == 0.0, f"rest-state tendency {err:.3e}"

    record("cpe-rest-state", check_cpe_rest)

    return results
