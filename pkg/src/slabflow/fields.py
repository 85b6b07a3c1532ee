"""Spectral field containers.

Two carrier types:

* ``SpectralField3`` -- a real 3-D field stored as complex Fourier
  coefficients together with a declared parity in the z-variable.  Velocities
  are Even (cosine series in z), vertical velocities Odd (sine series).
* ``SpectralField2`` -- a real horizontal field (density, pressure).  Storing
  these as 2-D objects makes z-independence, and with it hydrostatic balance,
  exact by representation rather than approximate.

Fields are value-semantic: every operation returns a fresh field and never
mutates its inputs, so fields can be shared freely across threads.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.fft as _fft

from .errors import DimensionMismatch, ParityMismatch
from .grid import AREA_H, VOLUME, Grid

#: Relative tolerance for reality / declared-parity validation of samples.
VALIDATE_RTOL = 1e-8


class Parity(enum.Enum):
    EVEN = "even"
    ODD = "odd"

    def __mul__(self, other: "Parity") -> "Parity":
        return Parity.EVEN if self is other else Parity.ODD


def _flip_last_axis(coeffs: np.ndarray) -> np.ndarray:
    # Index map m -> (-m) mod n along the last axis: reverse, then roll by one.
    return np.roll(coeffs[..., ::-1], 1, axis=-1)


def _parity_project_coeffs(coeffs: np.ndarray, flip_z: np.ndarray, parity: Parity) -> np.ndarray:
    flipped = _flip_last_axis(coeffs)
    if parity is Parity.EVEN:
        return 0.5 * (coeffs + flipped)
    # The Nyquist plane m = -m is annihilated automatically: (c - c)/2 = 0.
    return 0.5 * (coeffs - flipped)


@dataclass(frozen=True)
class SpectralField3:
    grid: Grid
    parity: Parity
    coeffs: np.ndarray  # complex, shape (nx, ny, nz), numpy FFT ordering

    def __post_init__(self) -> None:
        if self.coeffs.shape != self.grid.shape3:
            raise DimensionMismatch(
                f"coefficient shape {self.coeffs.shape} != grid {self.grid.shape3}"
            )

    # arithmetic ------------------------------------------------------------

    def __add__(self, other: "SpectralField3") -> "SpectralField3":
        self._require_compatible(other)
        return SpectralField3(self.grid, self.parity, self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField3") -> "SpectralField3":
        self._require_compatible(other)
        return SpectralField3(self.grid, self.parity, self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> "SpectralField3":
        return SpectralField3(self.grid, self.parity, self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralField3":
        return SpectralField3(self.grid, self.parity, -self.coeffs)

    def _require_compatible(self, other: "SpectralField3") -> None:
        if self.grid != other.grid:
            raise DimensionMismatch("fields live on different grids")
        if self.parity is not other.parity:
            raise ParityMismatch(
                f"cannot combine {self.parity.value} and {other.parity.value} fields linearly"
            )

    # diagnostics -----------------------------------------------------------

    def mean(self) -> float:
        return float(self.coeffs[0, 0, 0].real)

    def integral(self) -> float:
        return self.mean() * VOLUME

    def parity_defect(self) -> float:
        """Norm of the component with the opposite parity, relative to the field."""
        opposite = self.coeffs - _parity_project_coeffs(self.coeffs, self.grid.flip_z, self.parity)
        scale = np.linalg.norm(self.coeffs)
        return float(np.linalg.norm(opposite) / max(scale, 1e-300))

    def hermitian_defect(self) -> float:
        mirrored = np.conj(self.coeffs[self.grid.flip_all3])
        scale = np.linalg.norm(self.coeffs)
        return float(np.linalg.norm(self.coeffs - mirrored) / max(scale, 1e-300))


@dataclass(frozen=True)
class SpectralField2:
    grid: Grid
    coeffs: np.ndarray  # complex, shape (nx, ny)

    def __post_init__(self) -> None:
        if self.coeffs.shape != self.grid.shape2:
            raise DimensionMismatch(
                f"coefficient shape {self.coeffs.shape} != grid {self.grid.shape2}"
            )

    def __add__(self, other: "SpectralField2") -> "SpectralField2":
        if self.grid != other.grid:
            raise DimensionMismatch("fields live on different grids")
        return SpectralField2(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField2") -> "SpectralField2":
        if self.grid != other.grid:
            raise DimensionMismatch("fields live on different grids")
        return SpectralField2(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> "SpectralField2":
        return SpectralField2(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralField2":
        return SpectralField2(self.grid, -self.coeffs)

    def mean(self) -> float:
        return float(self.coeffs[0, 0].real)

    def integral(self) -> float:
        """Integral over the full 3-D domain of the z-independent extension."""
        return self.mean() * VOLUME

    def integral_h(self) -> float:
        return self.mean() * AREA_H


def zeros3(grid: Grid, parity: Parity) -> SpectralField3:
    return SpectralField3(grid, parity, np.zeros(grid.shape3, dtype=complex))


def zeros2(grid: Grid) -> SpectralField2:
    return SpectralField2(grid, np.zeros(grid.shape2, dtype=complex))


def constant2(grid: Grid, value: float) -> SpectralField2:
    c = np.zeros(grid.shape2, dtype=complex)
    c[0, 0] = value
    return SpectralField2(grid, c)


# -- transforms ---------------------------------------------------------------

def to_spectral(
    values: np.ndarray,
    grid: Grid,
    parity: Parity | None = None,
    validate: bool = True,
) -> SpectralField3 | SpectralField2:
    """Forward transform of real samples on the collocation grid.

    3-D samples require a declared parity; the samples are checked against it
    (to a relative tolerance) and then projected so that the stored
    coefficients satisfy the parity constraint exactly up to round-off.
    """
    grid.require_shape(values)
    if values.ndim == 2:
        coeffs = _fft.fft2(values, norm="forward")
        return SpectralField2(grid, coeffs)
    if parity is None:
        raise ParityMismatch("3-D fields must declare a z-parity (Even or Odd)")
    coeffs = _fft.fftn(values, norm="forward")
    projected = _parity_project_coeffs(coeffs, grid.flip_z, parity)
    if validate:
        defect = np.linalg.norm(coeffs - projected)
        scale = max(np.linalg.norm(coeffs), 1e-300)
        if defect > VALIDATE_RTOL * scale:
            raise ParityMismatch(
                f"samples are not {parity.value} in z "
                f"(relative defect {defect / scale:.3e})"
            )
    return SpectralField3(grid, parity, projected)


def to_physical(field: SpectralField3 | SpectralField2) -> np.ndarray:
    """Inverse transform; asserts the result is real and discards the residue."""
    if isinstance(field, SpectralField2):
        values = _fft.ifft2(field.coeffs, norm="forward")
    else:
        values = _fft.ifftn(field.coeffs, norm="forward")
    scale = float(np.max(np.abs(values)))
    imag_residue = float(np.max(np.abs(values.imag)))
    # Fields at pure round-off level carry no meaningful reality information.
    if scale > 1e-13 and imag_residue > 1e-10 * scale:
        raise ParityMismatch(
            f"field is not real in physical space (imag residue {imag_residue:.3e})"
        )
    return values.real


# -- pointwise products -------------------------------------------------------

def multiply(
    f: SpectralField3 | SpectralField2,
    g: SpectralField3 | SpectralField2,
) -> SpectralField3 | SpectralField2:
    """Dealiased pointwise product.

    The product is formed on the collocation grid and truncated by the 2/3
    rule, so it equals the exact (convolution) product on all retained modes
    whenever both inputs are themselves within the retained band.  Parity of
    a 3-D result follows the parity algebra (Even*Even = Even, Even*Odd =
    Odd); 2-D factors count as Even.
    """
    from .operators import dealias  # local import to avoid a cycle

    fp = to_physical(f)
    gp = to_physical(g)
    if fp.ndim == 2 and gp.ndim == 2:
        prod = fp * gp
        return dealias(to_spectral(prod, f.grid))
    if fp.ndim == 2:
        fp = fp[:, :, None]
    if gp.ndim == 2:
        gp = gp[:, :, None]
    parity_f = f.parity if isinstance(f, SpectralField3) else Parity.EVEN
    parity_g = g.parity if isinstance(g, SpectralField3) else Parity.EVEN
    grid = f.grid
    out = to_spectral(fp * gp, grid, parity_f * parity_g, validate=False)
    return dealias(out)
