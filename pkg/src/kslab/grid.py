"""Periodic spectral discretization: grids, transforms, wavenumbers, dealiasing.

Conventions
-----------
The box is ``[-L/2, L/2)^d`` sampled at ``n`` points per axis.  The
spectral coefficient attached to the integer mode ``k`` (wrapped to
``{-n/2, ..., n/2-1}``) approximates the continuum transform
``F(xi) = integral f(x) exp(-i xi . x) dx`` at ``xi = 2 pi k / L``:
the discrete sum carries the quadrature weight ``(L/n)**d`` and the
phase factor accounting for the centered coordinates.  A band-limited
function therefore transforms exactly, e.g. a unit Gaussian on a large
box has ``coeffs[0] == pi**(d/2)`` up to its (tiny) periodization tail.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
import struct

import numpy as np

from .errors import ConfigError, SymmetryViolation

#: Relative imaginary residue tolerated when transforming back to physical space.
IMAG_TOLERANCE = 1e-10


@dataclass(frozen=True)
class GridSpec:
    """Geometry of a periodic spectral grid.

    Parameters
    ----------
    d : int
        Space dimension, 2 <= d <= 4.
    n : int
        Points per axis; an even power of two, n >= 8.
    box_length : float
        Physical period L per axis.
    dealias_fraction : float
        Fraction of the Nyquist index retained by :func:`dealias`.
    """

    d: int
    n: int
    box_length: float
    dealias_fraction: float = 2.0 / 3.0

    def __post_init__(self) -> None:
        if not 2 <= self.d <= 4:
            raise ConfigError(f"dimension must be in [2, 4], got {self.d}")
        if self.n < 8 or self.n % 2 != 0 or self.n & (self.n - 1) != 0:
            raise ConfigError(f"n must be an even power of two >= 8, got {self.n}")
        if not self.box_length > 0:
            raise ConfigError(f"box_length must be positive, got {self.box_length}")
        if not 0 < self.dealias_fraction <= 1:
            raise ConfigError(
                f"dealias_fraction must lie in (0, 1], got {self.dealias_fraction}"
            )

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.d

    @property
    def dx(self) -> float:
        return self.box_length / self.n

    @property
    def cell_volume(self) -> float:
        return self.dx**self.d

    @property
    def volume(self) -> float:
        return self.box_length**self.d

    @property
    def xi_max(self) -> float:
        """Largest representable wavenumber magnitude (box corner)."""
        return np.pi * self.n / self.box_length * np.sqrt(self.d)

    @property
    def dealias_cutoff(self) -> float:
        """Modes with any wrapped index above this are zeroed by dealias()."""
        return self.dealias_fraction * self.n / 2


def default_box_length(d: int) -> float:
    """Default physical period per dimension."""
    return {2: 20.0 * np.pi, 3: 8.0 * np.pi, 4: 4.0 * np.pi}[d]


@lru_cache(maxsize=32)
def wrapped_indices(grid: GridSpec) -> np.ndarray:
    """Integer mode numbers in FFT storage order, wrapped to [-n/2, n/2)."""
    k = np.fft.fftfreq(grid.n, d=1.0 / grid.n)
    return np.rint(k).astype(np.int64)


@lru_cache(maxsize=32)
def axis_wavenumber(grid: GridSpec) -> np.ndarray:
    """Physical wavenumbers 2 pi k / L along one axis, FFT storage order."""
    return 2.0 * np.pi * wrapped_indices(grid) / grid.box_length


def _axis_view(arr: np.ndarray, axis: int, d: int) -> np.ndarray:
    shape = [1] * d
    shape[axis] = arr.size
    return arr.reshape(shape)


def wavenumber_component(grid: GridSpec, axis: int) -> np.ndarray:
    """xi_axis broadcastable against a full coefficient array."""
    return _axis_view(axis_wavenumber(grid), axis, grid.d)


@lru_cache(maxsize=32)
def _odd_axis_wavenumber(grid: GridSpec) -> np.ndarray:
    # the unpaired Nyquist mode cannot carry an odd derivative of a real
    # field; its wavenumber is zeroed so first derivatives stay Hermitian
    xi = axis_wavenumber(grid).copy()
    xi[grid.n // 2] = 0.0
    return xi


def odd_wavenumber_component(grid: GridSpec, axis: int) -> np.ndarray:
    """xi_axis for odd-order derivatives (Nyquist entry zeroed)."""
    return _axis_view(_odd_axis_wavenumber(grid), axis, grid.d)


@lru_cache(maxsize=32)
def xi_squared(grid: GridSpec) -> np.ndarray:
    """|xi|^2 on the full grid."""
    out = np.zeros(grid.shape)
    for ax in range(grid.d):
        out = out + wavenumber_component(grid, ax) ** 2
    return out


@lru_cache(maxsize=32)
def centered_phase(grid: GridSpec) -> np.ndarray:
    """(-1)**(k_1 + ... + k_d): converts FFT output to centered-box transforms."""
    sign = 1.0 - 2.0 * (np.arange(grid.n) % 2)
    out = np.ones(grid.shape)
    for ax in range(grid.d):
        out = out * _axis_view(sign, ax, grid.d)
    return out


@lru_cache(maxsize=32)
def axis_coordinate(grid: GridSpec) -> np.ndarray:
    """Physical sample positions -L/2 + m L/n along one axis."""
    return -grid.box_length / 2 + grid.dx * np.arange(grid.n)


def coordinate_component(grid: GridSpec, axis: int) -> np.ndarray:
    return _axis_view(axis_coordinate(grid), axis, grid.d)


def radius_squared(grid: GridSpec) -> np.ndarray:
    """|x|^2 from the box center."""
    out = np.zeros(grid.shape)
    for ax in range(grid.d):
        out = out + coordinate_component(grid, ax) ** 2
    return out


@lru_cache(maxsize=32)
def keep_mask(grid: GridSpec) -> np.ndarray:
    """True where a mode survives the dealias rule |k| <= fraction * n/2."""
    k = np.abs(wrapped_indices(grid))
    keep = np.ones(grid.shape, dtype=bool)
    for ax in range(grid.d):
        keep &= _axis_view(k, ax, grid.d) <= grid.dealias_cutoff
    return keep


@dataclass
class SpectralField:
    """Complex Fourier coefficients of a real field on a periodic grid."""

    grid: GridSpec
    coeffs: np.ndarray = field(repr=False)
    time_tag: float = 0.0

    def __post_init__(self) -> None:
        self.coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        if self.coeffs.shape != self.grid.shape:
            raise ConfigError(
                f"coefficient shape {self.coeffs.shape} does not match grid {self.grid.shape}"
            )
        if self.time_tag < 0:
            raise ConfigError("time_tag must be nonnegative")

    def copy(self, time_tag: float | None = None) -> "SpectralField":
        return SpectralField(
            self.grid,
            self.coeffs.copy(),
            self.time_tag if time_tag is None else time_tag,
        )


@dataclass
class PhysicalField:
    """Real point values of a field on the periodic grid."""

    grid: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != self.grid.shape:
            raise ConfigError(
                f"value shape {self.values.shape} does not match grid {self.grid.shape}"
            )


def zero_spectral(grid: GridSpec, time_tag: float = 0.0) -> SpectralField:
    return SpectralField(grid, np.zeros(grid.shape, dtype=np.complex128), time_tag)


def to_spectral(f: PhysicalField, time_tag: float = 0.0) -> SpectralField:
    """Forward transform with the continuum normalization.

    ``coeffs[k] = (L/n)^d * sum_m f(x_m) exp(-i xi_k . x_m)`` so that a
    constant field c maps to ``c * L^d`` at the zero mode.
    """
    grid = f.grid
    coeffs = np.fft.fftn(f.values) * (grid.cell_volume * centered_phase(grid))
    return SpectralField(grid, coeffs, time_tag)


def from_spectral(F: SpectralField) -> PhysicalField:
    """Inverse of :func:`to_spectral`.

    Raises
    ------
    SymmetryViolation
        If the inverse transform carries a relative imaginary residue
        above ``IMAG_TOLERANCE`` (the coefficients were not Hermitian).
    """
    grid = F.grid
    w = np.fft.ifftn(F.coeffs * centered_phase(grid)) / grid.cell_volume
    scale = np.max(np.abs(w))
    if scale > 0.0:
        residue = np.max(np.abs(w.imag)) / scale
        if residue > IMAG_TOLERANCE:
            raise SymmetryViolation(
                f"imaginary residue {residue:.3e} exceeds {IMAG_TOLERANCE:.1e}"
            )
    return PhysicalField(grid, w.real)


def dealias(F: SpectralField) -> SpectralField:
    """Zero every mode whose wrapped index exceeds the grid's dealias cutoff."""
    return SpectralField(F.grid, np.where(keep_mask(F.grid), F.coeffs, 0.0), F.time_tag)


def hermitian_defect(F: SpectralField) -> float:
    """Relative departure from coeffs(-k) == conj(coeffs(k))."""
    c = F.coeffs
    rev = c
    for ax in range(F.grid.d):
        rev = np.roll(np.flip(rev, axis=ax), 1, axis=ax)
    scale = np.max(np.abs(c))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(rev - np.conj(c))) / scale)


def evaluate_scaled(F: SpectralField, lam: float) -> PhysicalField:
    """Sample the band-limited interpolant of F at the contracted points lam * x.

    Requires ``0 < lam <= 1`` so every evaluation point stays inside the box.
    Used by the self-similarity diagnostics; cost O(d n^(d+1)).
    """
    if not 0 < lam <= 1:
        raise ConfigError(f"scale factor must lie in (0, 1], got {lam}")
    grid = F.grid
    xi = axis_wavenumber(grid)
    x = axis_coordinate(grid)
    # per-axis evaluation matrix E[k, m] = exp(i lam xi_k x_m)
    E = np.exp(1j * lam * np.outer(xi, x))
    arr = F.coeffs / grid.volume
    for _ in range(grid.d):
        # contract the leading axis, cycling so axis order is preserved
        arr = np.tensordot(arr, E, axes=([0], [0]))
    scale = np.max(np.abs(arr))
    if scale > 0 and np.max(np.abs(arr.imag)) / scale > 1e-8:
        raise SymmetryViolation("scaled evaluation produced a non-real field")
    return PhysicalField(grid, arr.real)


# ---------------------------------------------------------------------------
# KSF1 binary snapshots
# ---------------------------------------------------------------------------

_KSF1_MAGIC = b"KSF1"


def write_ksf1(F: SpectralField, path) -> None:
    """Write a spectral field snapshot.

    Layout: magic ``KSF1``, little-endian u32 d, u32 n, f64 L, f64
    time_tag, then n^d complex values as interleaved little-endian f64
    (re, im) in row-major wavenumber-index order.
    """
    grid = F.grid
    header = _KSF1_MAGIC + struct.pack(
        "<IIdd", grid.d, grid.n, grid.box_length, F.time_tag
    )
    flat = np.ascontiguousarray(F.coeffs, dtype="<c16")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(flat.tobytes())


def read_ksf1(path, dealias_fraction: float = 2.0 / 3.0) -> SpectralField:
    """Read a snapshot written by :func:`write_ksf1`.

    The format does not persist the dealias fraction; pass it if the
    producing grid used a non-default value.
    """
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _KSF1_MAGIC:
            raise ConfigError(f"bad magic {magic!r}, expected {_KSF1_MAGIC!r}")
        d, n, L, time_tag = struct.unpack("<IIdd", fh.read(24))
        grid = GridSpec(d=d, n=n, box_length=L, dealias_fraction=dealias_fraction)
        count = n**d
        data = np.frombuffer(fh.read(16 * count), dtype="<c16", count=count)
    return SpectralField(grid, data.reshape(grid.shape).astype(np.complex128), time_tag)
