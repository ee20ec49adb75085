"""Right-hand sides of the simulated systems in spectral form.

Models: the doubly parabolic chemotaxis system (PP), its elliptic limit
(PE), the two toy variants (TM: drift replaced by -u Lap(phi); TM2:
forcing (Lap phi)^2), and the plain quadratic heat equation (NLH).
Each nonlinear term is evaluated pseudospectrally (products in physical
space) and dealiased before it is returned.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, GridMismatch, ModelMismatch
from .grid import (
    PhysicalField,
    SpectralField,
    dealias,
    from_spectral,
    odd_wavenumber_component,
    to_spectral,
    xi_squared,
    zero_spectral,
)

MODELS = ("PP", "PE", "TM", "TM2", "NLH")
#: models whose dynamics read the chemoattractant field
PHI_MODELS = ("PP", "PE", "TM", "TM2")
#: models with a genuine relaxation time
TAU_MODELS = ("PP", "TM", "TM2")


@dataclass(frozen=True)
class SystemSpec:
    """Which model to run, in which dimension, with which parameters."""

    model: str
    d: int
    tau: float = 1.0
    alpha: float = 0.0

    def __post_init__(self) -> None:
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}, expected one of {MODELS}")
        if self.model in TAU_MODELS and not self.tau > 0:
            raise ConfigError(f"tau must be positive for {self.model}, got {self.tau}")
        if self.alpha < 0:
            raise ConfigError(f"damping alpha must be nonnegative, got {self.alpha}")

    @property
    def needs_phi(self) -> bool:
        return self.model in PHI_MODELS


@dataclass
class CoupledState:
    """Cell density and chemoattractant sharing one grid and one clock."""

    u: SpectralField
    phi: SpectralField | None
    time: float = 0.0

    def __post_init__(self) -> None:
        if self.phi is not None and self.phi.grid != self.u.grid:
            raise GridMismatch("u and phi live on different grids")

    def copy(self) -> "CoupledState":
        return CoupledState(
            self.u.copy(), None if self.phi is None else self.phi.copy(), self.time
        )


def _require_phi(state: CoupledState, spec: SystemSpec) -> SpectralField:
    if state.phi is None:
        raise ModelMismatch(f"model {spec.model} needs a chemoattractant field")
    return state.phi


def gradient_physical(F: SpectralField) -> list[np.ndarray]:
    """Physical-space components of the spectral gradient."""
    grid = F.grid
    out = []
    for ax in range(grid.d):
        comp = SpectralField(grid, 1j * odd_wavenumber_component(grid, ax) * F.coeffs)
        out.append(from_spectral(comp).values)
    return out


def nonlinearity(state: CoupledState, spec: SystemSpec) -> SpectralField:
    """Spectral nonlinear term of the chosen model, dealiased.

    PP/PE return the conservative drift term -div(u grad phi): the
    gradient is taken spectrally, the product formed pointwise, and the
    divergence applied back in spectral space, so the zero mode vanishes
    identically and mass is conserved to rounding.
    """
    grid = state.u.grid
    u_phys = from_spectral(state.u).values
    if spec.model in ("PP", "PE"):
        phi = _require_phi(state, spec)
        grad_phi = gradient_physical(phi)
        div = np.zeros(grid.shape, dtype=np.complex128)
        for ax in range(grid.d):
            flux = to_spectral(PhysicalField(grid, u_phys * grad_phi[ax]))
            div += 1j * odd_wavenumber_component(grid, ax) * flux.coeffs
        return dealias(SpectralField(grid, -div, state.u.time_tag))
    if spec.model == "TM":
        phi = _require_phi(state, spec)
        lap_phi = from_spectral(
            SpectralField(grid, -xi_squared(grid) * phi.coeffs)
        ).values
        prod = to_spectral(PhysicalField(grid, -u_phys * lap_phi))
        return dealias(SpectralField(grid, prod.coeffs, state.u.time_tag))
    if spec.model == "TM2":
        phi = _require_phi(state, spec)
        lap_phi = from_spectral(
            SpectralField(grid, -xi_squared(grid) * phi.coeffs)
        ).values
        prod = to_spectral(PhysicalField(grid, lap_phi**2))
        return dealias(SpectralField(grid, prod.coeffs, state.u.time_tag))
    if spec.model == "NLH":
        prod = to_spectral(PhysicalField(grid, u_phys**2))
        return dealias(SpectralField(grid, prod.coeffs, state.u.time_tag))
    raise ConfigError(f"unknown model {spec.model!r}")


def elliptic_phi(u: SpectralField) -> SpectralField:
    """Solve Lap(phi) + u = 0 with the zero-mean gauge phi_hat(0) = 0."""
    xi2 = xi_squared(u.grid)
    coeffs = np.where(xi2 > 0, u.coeffs / np.where(xi2 > 0, xi2, 1.0), 0.0)
    return SpectralField(u.grid, coeffs, u.time_tag)


def _duhamel_weights(z: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """phi1 = int_0^h e^(-lam(h-s)) ds and phi2 = same with weight s/h,
    written against z = lam * h with series fallbacks near z = 0."""
    small = np.abs(z) < 1e-5
    zs = np.where(small, 1.0, z)  # dummy to keep divisions finite
    phi1 = np.where(small, h * (1.0 - z / 2.0 + z**2 / 6.0), -np.expm1(-zs) / (zs / h))
    phi2 = np.where(
        small,
        h * (0.5 - z / 6.0 + z**2 / 24.0),
        (zs - 1.0 + np.exp(-zs)) / (zs**2 / h),
    )
    return phi1, phi2


def phi_exact_update(
    phi: SpectralField,
    u_history: list[SpectralField],
    tau: float,
    alpha: float,
    dt: float,
) -> SpectralField:
    """Advance the chemoattractant over one step with its exact linear factor.

    The homogeneous part decays by exp(-(|xi|^2 + alpha) dt / tau); the
    source integral of u/tau uses the endpoint values of ``u_history``
    (one entry: u held constant, so the update is exact for a source
    that is constant over the step; two or more: linear in time between
    the first and last entries).
    """
    if dt <= 0:
        raise ConfigError(f"dt must be positive, got {dt}")
    if not u_history:
        raise ConfigError("u_history must cover the step")
    grid = phi.grid
    lam = (xi_squared(grid) + alpha) / tau
    z = lam * dt
    decay = np.exp(-z)
    phi1, phi2 = _duhamel_weights(z, dt)
    u0 = u_history[0].coeffs
    u1 = u_history[-1].coeffs
    source = (u0 * (phi1 - phi2) + u1 * phi2) / tau
    return SpectralField(grid, decay * phi.coeffs + source, phi.time_tag + dt)


def uniform_state(
    grid_spec, u_value: float, phi_value: float | None = 0.0
) -> CoupledState:
    """Spatially uniform state, mostly for oracle tests."""
    u = zero_spectral(grid_spec)
    u.coeffs[(0,) * grid_spec.d] = u_value * grid_spec.volume
    phi = None
    if phi_value is not None:
        phi = zero_spectral(grid_spec)
        phi.coeffs[(0,) * grid_spec.d] = phi_value * grid_spec.volume
    return CoupledState(u, phi, 0.0)
