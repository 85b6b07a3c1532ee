"""Periodic slab grid and its Fourier bookkeeping.

The domain is a horizontally periodic square of side 2*pi crossed with a
vertical circle of period 2.  Horizontal wavenumbers are therefore integers
and vertical wavenumbers are pi*m with integer m.  Physical samples live on
the uniform collocation grid; spectral coefficients use numpy's FFT ordering
with forward normalization, so the (0, 0, 0) coefficient equals the domain
mean of the field.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DimensionMismatch

LX = 2.0 * np.pi
LY = 2.0 * np.pi
LZ = 2.0

#: Volume of the full periodic domain (2*pi)^2 * 2.
VOLUME = LX * LY * LZ
#: Area of the horizontal torus.
AREA_H = LX * LY


def _wavenumbers(n: int) -> np.ndarray:
    """Integer FFT mode indices k in {-n/2+1, ..., n/2} in numpy ordering."""
    return np.rint(np.fft.fftfreq(n) * n).astype(int)


def _third(n: int) -> int:
    # Largest retained |k| under the 2/3 rule.  Products of retained modes
    # alias only onto discarded ones provided n > 3 * (n // 3); all grids
    # used here (powers of two) satisfy that strictly.
    return n // 3


@dataclass(frozen=True)
class Grid:
    """Mode counts of the collocation grid; all derived arrays are cached."""

    nx: int
    ny: int
    nz: int

    def __post_init__(self) -> None:
        for name, n in (("nx", self.nx), ("ny", self.ny), ("nz", self.nz)):
            if n < 4 or n % 2 != 0:
                raise ValueError(f"{name} must be even and >= 4, got {n}")

    # -- physical sample coordinates ----------------------------------------

    @cached_property
    def x(self) -> np.ndarray:
        return LX * np.arange(self.nx) / self.nx

    @cached_property
    def y(self) -> np.ndarray:
        return LY * np.arange(self.ny) / self.ny

    @cached_property
    def z(self) -> np.ndarray:
        return LZ * np.arange(self.nz) / self.nz

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Physical coordinates broadcast to the (nx, ny, nz) sample shape."""
        return np.meshgrid(self.x, self.y, self.z, indexing="ij")

    def meshgrid_h(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x, self.y, indexing="ij")

    # -- wavenumbers ---------------------------------------------------------

    @cached_property
    def kx(self) -> np.ndarray:
        return _wavenumbers(self.nx)

    @cached_property
    def ky(self) -> np.ndarray:
        return _wavenumbers(self.ny)

    @cached_property
    def mz(self) -> np.ndarray:
        """Integer vertical mode index m; the wavenumber is pi*m."""
        return _wavenumbers(self.nz)

    @cached_property
    def kx3(self) -> np.ndarray:
        return self.kx[:, None, None].astype(float)

    @cached_property
    def ky3(self) -> np.ndarray:
        return self.ky[None, :, None].astype(float)

    @cached_property
    def kz3(self) -> np.ndarray:
        return np.pi * self.mz[None, None, :].astype(float)

    @cached_property
    def kx2(self) -> np.ndarray:
        return self.kx[:, None].astype(float)

    @cached_property
    def ky2(self) -> np.ndarray:
        return self.ky[None, :].astype(float)

    @cached_property
    def k2h(self) -> np.ndarray:
        """|k_h|^2 = kx^2 + ky^2 on the horizontal mode lattice."""
        return self.kx2**2 + self.ky2**2

    # -- dealiasing and parity index maps -------------------------------------

    @cached_property
    def dealias_mask3(self) -> np.ndarray:
        keep_x = np.abs(self.kx) <= _third(self.nx)
        keep_y = np.abs(self.ky) <= _third(self.ny)
        keep_z = np.abs(self.mz) <= _third(self.nz)
        return keep_x[:, None, None] & keep_y[None, :, None] & keep_z[None, None, :]

    @cached_property
    def dealias_mask2(self) -> np.ndarray:
        keep_x = np.abs(self.kx) <= _third(self.nx)
        keep_y = np.abs(self.ky) <= _third(self.ny)
        return keep_x[:, None] & keep_y[None, :]

    @cached_property
    def flip_z(self) -> np.ndarray:
        """Index map m -> -m (mod nz) along the vertical axis."""
        return (-np.arange(self.nz)) % self.nz

    @cached_property
    def flip_all3(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        fx = (-np.arange(self.nx)) % self.nx
        fy = (-np.arange(self.ny)) % self.ny
        return np.ix_(fx, fy, self.flip_z)

    # -- shapes ----------------------------------------------------------------

    @property
    def shape3(self) -> tuple[int, int, int]:
        return (self.nx, self.ny, self.nz)

    @property
    def shape2(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    @property
    def dx_h(self) -> float:
        return min(LX / self.nx, LY / self.ny)

    @property
    def dx_min(self) -> float:
        return min(LX / self.nx, LY / self.ny, LZ / self.nz)

    def require_shape(self, values: np.ndarray) -> None:
        if values.shape not in (self.shape3, self.shape2):
            raise DimensionMismatch(
                f"sample shape {values.shape} does not match grid "
                f"{self.shape3} or {self.shape2}"
            )
