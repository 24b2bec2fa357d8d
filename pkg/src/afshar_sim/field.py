"""Transverse grids, complex scalar fields and the sources that populate them.

All fields live on a 1-D grid centered at zero: sample ``j`` sits at
``(j - n/2) * dx``.  Flux is the rectangle-rule sum ``sum(|amp|**2) * dx`` so
that conservation checks compare like with like.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "GridSpec",
    "ScalarField",
    "Mask",
    "make_grid",
    "gaussian_beam",
    "slit",
    "slit_pair",
    "total_flux",
    "intensity",
]


@dataclass(frozen=True)
class GridSpec:
    """Uniform transverse sampling.

    Parameters
    ----------
    n : int
        Number of samples.  Powers of two keep the FFTs fast.
    dx : float
        Sample pitch [m].
    wavelength : float
        Vacuum wavelength [m].
    """

    n: int
    dx: float
    wavelength: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 16:
            raise ValueError(f"grid needs n >= 16 samples, got n={self.n}")
        if not self.dx > 0:
            raise ValueError(f"dx must be positive, got {self.dx}")
        if not self.wavelength > 0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength}")

    @property
    def span(self):
        return self.n * self.dx

    @property
    def k(self):
        """Vacuum wavenumber 2*pi/wavelength [1/m]."""
        return 2 * np.pi / self.wavelength

    @property
    def x(self):
        """Sample coordinates [m], read-only."""
        x = (np.arange(self.n) - self.n // 2) * self.dx
        x.flags.writeable = False
        return x

    def index_of(self, position):
        """Nearest sample index for a transverse position."""
        return int(np.rint(position / self.dx)) + self.n // 2


def make_grid(n, dx, wavelength):
    """Centered grid with ``n`` samples at pitch ``dx``.

    Raises ``ValueError`` for ``n < 16`` or non-positive ``dx``/``wavelength``.
    """
    return GridSpec(int(n), float(dx), float(wavelength))


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Complex amplitude samples on a grid (units of sqrt(flux density))."""

    grid: GridSpec
    amp: np.ndarray

    def __post_init__(self):
        amp = _frozen(self.amp, complex)
        if amp.shape != (self.grid.n,):
            raise ValueError(f"amp has shape {amp.shape}, grid expects ({self.grid.n},)")
        if not np.all(np.isfinite(amp)):
            raise ValueError("field amplitudes must be finite")
        object.__setattr__(self, "amp", amp)

    def __add__(self, other):
        _check_same_grid(self.grid, other.grid)
        return ScalarField(self.grid, self.amp + other.amp)

    def __mul__(self, c):
        return ScalarField(self.grid, self.amp * complex(c))

    __rmul__ = __mul__

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros(grid.n, complex))


@dataclass(frozen=True, eq=False)
class Mask:
    """Real transmission profile with every sample in [0, 1]."""

    grid: GridSpec
    t: np.ndarray

    def __post_init__(self):
        t = _frozen(self.t, float)
        if t.shape != (self.grid.n,):
            raise ValueError(f"mask has shape {t.shape}, grid expects ({self.grid.n},)")
        if np.any(t < 0) or np.any(t > 1) or not np.all(np.isfinite(t)):
            raise ValueError("mask transmission must lie in [0, 1]")
        object.__setattr__(self, "t", t)

    def __mul__(self, other):
        _check_same_grid(self.grid, other.grid)
        return Mask(self.grid, self.t * other.t)


def _check_same_grid(a, b):
    if a != b:
        raise ValueError(f"grid mismatch: {a} vs {b}")


def gaussian_beam(grid, waist, center=0.0, tilt=0.0, amplitude=1.0):
    """Tilted Gaussian beam at its waist.

    ``amp = amplitude * exp(-(x - center)**2 / waist**2) * exp(1j*k*sin(tilt)*x)``,
    so the 1/e^2 intensity half-width equals ``waist`` and the flux is
    ``|amplitude|**2 * waist * sqrt(pi/2)``.

    Parameters
    ----------
    grid : GridSpec
    waist : float
        1/e^2 intensity radius [m]; must exceed two samples.
    center : float
        Beam axis position in this plane [m].
    tilt : float
        Propagation angle to the optical axis [rad].  Must stay below the
        grid's aliasing limit ``arcsin(wavelength / (2*dx))``.
    amplitude : complex
        Peak amplitude.
    """
    if not waist > 2 * grid.dx:
        raise ValueError(f"waist {waist} is not resolvable at dx={grid.dx}")
    ratio = grid.wavelength / (2 * grid.dx)
    if ratio < 1 and abs(tilt) >= np.arcsin(ratio):
        raise ValueError(
            f"tilt {tilt} rad aliases on this grid (limit {np.arcsin(ratio):.4g} rad)"
        )
    x = grid.x
    amp = (
        complex(amplitude)
        * np.exp(-((x - center) ** 2) / waist**2)
        * np.exp(1j * grid.k * np.sin(tilt) * x)
    )
    return ScalarField(grid, amp)


def slit(grid, center, width):
    """Unit-amplitude slit; a sample is open iff its center lies in
    ``[center - width/2, center + width/2)``."""
    x = grid.x
    # relative slack keeps edge membership stable under rounding
    eps = 1e-9 * grid.dx
    inside = (x >= center - width / 2 - eps) & (x < center + width / 2 - eps)
    return ScalarField(grid, inside.astype(complex))


def slit_pair(grid, separation, slit_width):
    """Two unit-amplitude slits centered at ``+/- separation/2``.

    The half-open membership rule of :func:`slit` gives both slits the same
    sample count, hence equal flux.
    """
    if slit_width < 4 * grid.dx:
        raise ValueError(f"slit width {slit_width} is under 4 samples (dx={grid.dx})")
    if not separation > slit_width:
        raise ValueError(f"slits overlap: separation {separation} <= width {slit_width}")
    return slit(grid, -separation / 2, slit_width) + slit(grid, separation / 2, slit_width)


def total_flux(field):
    """Rectangle-rule flux ``sum(|amp|**2) * dx``."""
    return float(np.sum(intensity(field)) * field.grid.dx)


def intensity(field):
    """Pointwise intensity ``|amp|**2``."""
    a = field.amp
    return a.real**2 + a.imag**2
