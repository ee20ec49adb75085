"""Initial-data families with known scale-invariant norms.

The measure-like data of the self-similar theory get grid realizations:
the point mass becomes the band-limited delta (flat spectrum on the
retained modes, so its flat-norm equals the mass exactly), and the
inverse-square profile is synthesized spectrally from its exact Fourier
transform with the zero mode gauged away.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, FamilyMismatch
from .grid import (
    GridSpec,
    PhysicalField,
    SpectralField,
    coordinate_component,
    keep_mask,
    radius_squared,
    to_spectral,
    odd_wavenumber_component,
    xi_squared,
)

FAMILIES = (
    "Gaussian",
    "BandLimitedDelta",
    "Chandrasekhar",
    "RandomSignChanging",
    "CosineMode",
    "Uniform",
)


@dataclass(frozen=True)
class InitSpec:
    """One member of a one-parameter initial-data family."""

    family: str
    amplitude: float = 1.0
    width: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown family {self.family!r}, expected one of {FAMILIES}")
        if self.family in ("Gaussian", "RandomSignChanging") and not self.width > 0:
            raise ConfigError(f"width must be positive, got {self.width}")


def chandrasekhar_constant(d: int) -> float:
    """Exact Fourier constant of |x|^-2: transform = c_d |xi|^-(d-2)."""
    if d < 3:
        raise FamilyMismatch("inverse-square data needs d >= 3")
    return math.pi ** (d / 2.0) * 2.0 ** (d - 2) * math.gamma((d - 2) / 2.0)


def make(spec: InitSpec, grid: GridSpec) -> SpectralField:
    """Synthesize the requested family on the given grid.

    Every family is exactly linear in the amplitude.
    """
    M = spec.amplitude
    if spec.family == "Gaussian":
        values = M * np.exp(-radius_squared(grid) / spec.width**2)
        return to_spectral(PhysicalField(grid, values))

    if spec.family == "BandLimitedDelta":
        if grid.d != 2:
            raise FamilyMismatch("the band-limited delta targets the flat norm in d = 2")
        coeffs = np.where(keep_mask(grid), M + 0.0j, 0.0j)
        return SpectralField(grid, coeffs)

    if spec.family == "Chandrasekhar":
        if grid.d < 3:
            raise FamilyMismatch("inverse-square data needs d >= 3")
        xi2 = xi_squared(grid)
        c = chandrasekhar_constant(grid.d)
        with np.errstate(divide="ignore"):
            coeffs = np.where(xi2 > 0, M * c * xi2 ** (-(grid.d - 2) / 2.0), 0.0)
        return SpectralField(grid, coeffs.astype(np.complex128))

    if spec.family == "RandomSignChanging":
        rng = np.random.default_rng(spec.seed)
        psi = np.zeros(grid.shape)
        L = grid.box_length
        for _ in range(4):
            center = rng.uniform(-L / 4, L / 4, size=grid.d)
            width = rng.uniform(L / 16, L / 8) * spec.width
            r2 = np.zeros(grid.shape)
            for ax in range(grid.d):
                r2 = r2 + (coordinate_component(grid, ax) - center[ax]) ** 2
            psi += np.exp(-r2 / width**2)
        psi_hat = to_spectral(PhysicalField(grid, psi))
        coeffs = M * 1j * odd_wavenumber_component(grid, 0) * psi_hat.coeffs
        return SpectralField(grid, coeffs)

    if spec.family == "CosineMode":
        x1 = coordinate_component(grid, 0)
        values = M * np.cos(2.0 * np.pi * x1 / grid.box_length)
        values = np.broadcast_to(values, grid.shape).copy()
        return to_spectral(PhysicalField(grid, values))

    if spec.family == "Uniform":
        F = SpectralField(grid, np.zeros(grid.shape, dtype=np.complex128))
        F.coeffs[(0,) * grid.d] = M * grid.volume
        return F

    raise ConfigError(f"unknown family {spec.family!r}")
