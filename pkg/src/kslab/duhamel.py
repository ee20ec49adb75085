"""Mild-solution machinery: the operators L and B and the Picard iteration.

A trajectory is a list of spectral fields on the nodes ``(0, *t_grid)``
with linear interpolation in between.  L and B are evaluated by
time-marching their defining auxiliary problems with the same
exponential-quadrature rule the stepper uses (exact linear factors,
linear-in-time reconstruction of sources), which is equivalent to the
kernel integrals by Duhamel's principle; direct kernel quadrature
survives only as a small-instance oracle in the tests.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import BadExponent, ConfigError, Diverged, GridMismatch, ModelMismatch
from .grid import (
    GridSpec,
    PhysicalField,
    SpectralField,
    from_spectral,
    keep_mask,
    odd_wavenumber_component,
    to_spectral,
    xi_squared,
)
from .models import SystemSpec, _duhamel_weights
from .norms import heat_flow


def default_t_grid(count: int = 32, t_min: float = 1e-3, t_max: float = 1e2):
    return tuple(float(t) for t in np.geomspace(t_min, t_max, count))


@dataclass(frozen=True)
class PicardConfig:
    """Controls for :func:`picard_solve`."""

    max_iters: int = 30
    t_grid: tuple[float, ...] = dc_field(default_factory=default_t_grid)
    a: float | None = None  # weighted-norm exponent; defaults to d - 1
    conv_tol: float = 1e-8
    substeps: int = 4

    def __post_init__(self) -> None:
        if self.max_iters < 1:
            raise ConfigError("max_iters must be at least 1")
        ts = self.t_grid
        if len(ts) < 2 or any(t <= 0 for t in ts):
            raise ConfigError("t_grid must hold at least two positive times")
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ConfigError("t_grid must be strictly increasing")
        if self.substeps < 1:
            raise ConfigError("substeps must be at least 1")


@dataclass
class PicardReport:
    """Contraction diagnostics and the fixed point reached."""

    converged: bool
    iters: int
    ynorm_series: list[float]
    ratio_series: list[float]
    final: list[SpectralField] = dc_field(repr=False, default_factory=list)
    t_grid: tuple[float, ...] = ()
    a: float = 0.0

    def to_json(self) -> str:
        """Diagnostics only; the trajectory itself ships as KSF1 files."""
        payload = {
            "converged": self.converged,
            "iters": self.iters,
            "ynorm_series": self.ynorm_series,
            "ratio_series": self.ratio_series,
            "a": self.a,
            "t_grid": list(self.t_grid),
        }
        return json.dumps(payload)


# ---------------------------------------------------------------------------
# trajectories
# ---------------------------------------------------------------------------


def _nodes(t_grid) -> np.ndarray:
    return np.concatenate(([0.0], np.asarray(t_grid, dtype=float)))


def heat_trajectory(u0: SpectralField, t_grid) -> list[SpectralField]:
    """Exact heat flow sampled on (0, *t_grid)."""
    return [u0.copy(time_tag=0.0)] + [heat_flow(u0, t) for t in t_grid]


def ynorm_weight(t: float, a: float, d: int) -> float:
    return t ** (1.0 + (a - d) / 2.0)


def trajectory_ynorm(traj: list[SpectralField], t_grid, a: float) -> float:
    """max over positive nodes of t^(1+(a-d)/2) |xi|^a |u_hat|."""
    d = traj[0].grid.d
    if not d - 2 <= a < d:
        raise BadExponent(f"ynorm exponent must lie in [{d - 2}, {d}), got {a}")
    xi2 = xi_squared(traj[0].grid)
    with np.errstate(divide="ignore"):
        weight = np.where(xi2 > 0, xi2 ** (a / 2.0), 1.0 if a == 0 else 0.0)
    best = 0.0
    for F, t in zip(traj[1:], t_grid):
        val = ynorm_weight(t, a, d) * float(np.max(weight * np.abs(F.coeffs)))
        best = max(best, val)
    return best


def trajectory_ydistance(
    ta: list[SpectralField], tb: list[SpectralField], t_grid, a: float
) -> float:
    diff = [
        SpectralField(x.grid, x.coeffs - y.coeffs, x.time_tag) for x, y in zip(ta, tb)
    ]
    return trajectory_ynorm(diff, t_grid, a)


def _interp_coeffs(
    nodes: np.ndarray, traj: list[SpectralField], s: float
) -> np.ndarray:
    """Linear interpolation of the stored trajectory at time s."""
    idx = int(np.searchsorted(nodes, s))
    if idx <= 0:
        return traj[0].coeffs
    if idx >= nodes.size:
        return traj[-1].coeffs
    t0, t1 = nodes[idx - 1], nodes[idx]
    w = (s - t0) / (t1 - t0)
    return (1.0 - w) * traj[idx - 1].coeffs + w * traj[idx].coeffs


# ---------------------------------------------------------------------------
# the operators
# ---------------------------------------------------------------------------


def _drift_forcing(
    grid: GridSpec, u_coeffs: np.ndarray, psi_coeffs: np.ndarray
) -> np.ndarray:
    """-div(u grad psi) in spectral space, dealiased."""
    mask = keep_mask(grid)
    u_phys = from_spectral(SpectralField(grid, u_coeffs)).values
    div = np.zeros(grid.shape, dtype=np.complex128)
    for ax in range(grid.d):
        xi_ax = odd_wavenumber_component(grid, ax)
        grad = from_spectral(SpectralField(grid, 1j * xi_ax * psi_coeffs)).values
        flux = to_spectral(PhysicalField(grid, u_phys * grad))
        div += 1j * xi_ax * flux.coeffs
    return np.where(mask, -div, 0.0)


def _substep_times(t0: float, t1: float, m: int) -> np.ndarray:
    return np.linspace(t0, t1, m + 1)


def apply_L(
    u_traj: list[SpectralField],
    phi0: SpectralField,
    tau: float,
    t_grid=None,
    substeps: int = 4,
) -> list[SpectralField]:
    """March w_t = Lap(w) - div(u grad psi0), psi0(t) the tau-slowed heat
    flow of phi0, from w(0) = 0 across the trajectory nodes."""
    grid = u_traj[0].grid
    if phi0.grid != grid:
        raise GridMismatch("phi0 lives on a different grid")
    if t_grid is None:
        t_grid = [F.time_tag for F in u_traj[1:]]
    nodes = _nodes(t_grid)
    if len(u_traj) != nodes.size:
        raise GridMismatch("trajectory length does not match t_grid")
    xi2 = xi_squared(grid)

    def forcing(s: float) -> np.ndarray:
        u_s = _interp_coeffs(nodes, u_traj, s)
        psi_s = phi0.coeffs * np.exp(-s / tau * xi2)
        return _drift_forcing(grid, u_s, psi_s)

    w = np.zeros(grid.shape, dtype=np.complex128)
    out = [SpectralField(grid, w.copy(), 0.0)]
    f_left = forcing(0.0)
    for t0, t1 in zip(nodes, nodes[1:]):
        times = _substep_times(t0, t1, substeps)
        for s0, s1 in zip(times[:-1], times[1:]):
            h = s1 - s0
            decay = np.exp(-h * xi2)
            w1, w2 = _duhamel_weights(h * xi2, h)
            f_right = forcing(s1)
            w = decay * w + w1 * f_left + w2 * (f_right - f_left)
            f_left = f_right
        out.append(SpectralField(grid, w.copy(), t1))
    return out


def apply_B(
    u_traj: list[SpectralField],
    v_traj: list[SpectralField],
    tau: float,
    t_grid=None,
    substeps: int = 4,
) -> list[SpectralField]:
    """March the pair psi_t = (Lap(psi) + v)/tau, psi(0) = 0 and
    w_t = Lap(w) - div(u grad psi), w(0) = 0 across the trajectory nodes."""
    grid = u_traj[0].grid
    if v_traj[0].grid != grid:
        raise GridMismatch("u and v trajectories live on different grids")
    if t_grid is None:
        t_grid = [F.time_tag for F in u_traj[1:]]
    nodes = _nodes(t_grid)
    if len(u_traj) != nodes.size or len(v_traj) != nodes.size:
        raise GridMismatch("trajectory length does not match t_grid")
    xi2 = xi_squared(grid)

    w = np.zeros(grid.shape, dtype=np.complex128)
    psi = np.zeros(grid.shape, dtype=np.complex128)
    out = [SpectralField(grid, w.copy(), 0.0)]
    u_left = u_traj[0].coeffs
    for t0, t1 in zip(nodes, nodes[1:]):
        times = _substep_times(t0, t1, substeps)
        for s0, s1 in zip(times[:-1], times[1:]):
            h = s1 - s0
            lam = xi2 / tau
            decay_psi = np.exp(-h * lam)
            p1, p2 = _duhamel_weights(h * lam, h)
            v0 = _interp_coeffs(nodes, v_traj, s0)
            v1 = _interp_coeffs(nodes, v_traj, s1)
            psi_new = decay_psi * psi + (v0 * (p1 - p2) + v1 * p2) / tau

            u_right = _interp_coeffs(nodes, u_traj, s1)
            f_left = _drift_forcing(grid, u_left, psi)
            f_right = _drift_forcing(grid, u_right, psi_new)
            decay = np.exp(-h * xi2)
            w1, w2 = _duhamel_weights(h * xi2, h)
            w = decay * w + w1 * f_left + w2 * (f_right - f_left)
            psi = psi_new
            u_left = u_right
        out.append(SpectralField(grid, w.copy(), t1))
    return out


# ---------------------------------------------------------------------------
# Picard iteration
# ---------------------------------------------------------------------------


def picard_solve(
    u0: SpectralField,
    phi0: SpectralField | None,
    spec: SystemSpec,
    cfg: PicardConfig,
) -> PicardReport:
    """Iterate u <- U0 + L u + B(u, u) from the heat flow of u0.

    Convergence is declared when the relative weighted-norm distance of
    consecutive iterates drops below ``cfg.conv_tol``; the iteration is
    abandoned (``Diverged``) when an iterate's norm exceeds 1e6 times
    the heat flow's.
    """
    if spec.model != "PP":
        raise ModelMismatch(f"the fixed-point formulation is for PP, got {spec.model}")
    grid = u0.grid
    if phi0 is not None and phi0.grid != grid:
        raise GridMismatch("u0 and phi0 live on different grids")
    a = cfg.a if cfg.a is not None else float(grid.d - 1)
    if not grid.d - 2 <= a < grid.d:
        raise BadExponent(f"a must lie in [{grid.d - 2}, {grid.d}), got {a}")
    t_grid = cfg.t_grid

    u0_traj = heat_trajectory(u0, t_grid)
    base_norm = trajectory_ynorm(u0_traj, t_grid, a)
    has_phi = phi0 is not None and float(np.max(np.abs(phi0.coeffs))) > 0.0

    current = u0_traj
    ynorms: list[float] = []
    ratios: list[float] = []
    prev_dist = None
    for it in range(1, cfg.max_iters + 1):
        pieces = [u0_traj]
        if has_phi:
            pieces.append(apply_L(current, phi0, spec.tau, t_grid, cfg.substeps))
        pieces.append(apply_B(current, current, spec.tau, t_grid, cfg.substeps))
        new = [
            SpectralField(grid, sum(p[i].coeffs for p in pieces), old.time_tag)
            for i, old in enumerate(current)
        ]
        ynorm_new = trajectory_ynorm(new, t_grid, a)
        ynorms.append(ynorm_new)
        if ynorm_new > 1e6 * max(base_norm, 1e-300):
            raise Diverged(
                f"iterate norm {ynorm_new:.3e} exceeds 1e6 x heat-flow norm {base_norm:.3e}"
            )
        dist = trajectory_ydistance(new, current, t_grid, a)
        if prev_dist is not None and prev_dist > 0:
            ratios.append(dist / prev_dist)
        current = new
        if dist <= cfg.conv_tol * max(ynorm_new, 1e-300):
            return PicardReport(
                converged=True,
                iters=it,
                ynorm_series=ynorms,
                ratio_series=ratios,
                final=current,
                t_grid=tuple(t_grid),
                a=a,
            )
        prev_dist = dist
    return PicardReport(
        converged=False,
        iters=cfg.max_iters,
        ynorm_series=ynorms,
        ratio_series=ratios,
        final=current,
        t_grid=tuple(t_grid),
        a=a,
    )
