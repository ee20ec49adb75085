"""Exponential time stepping with blowup detection.

One step is second-order exponential time differencing (ETD-RK2): the
heat factor exp(-dt |xi|^2) is applied exactly, the nonlinearity enters
through the Duhamel integral with a predictor/corrector pair, and the
chemoattractant advances by its own exact integrating factor.  The
difference between predictor and corrector doubles as an embedded
first-order error estimate for adaptive step control.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import ConfigError, ModelMismatch, NonFinite
from .grid import SpectralField, dealias, from_spectral, write_ksf1, xi_squared
from .models import (
    CoupledState,
    SystemSpec,
    _duhamel_weights,
    elliptic_phi,
    nonlinearity,
    phi_exact_update,
)
from .norms import NormReport, compute_report

OUTCOME_DECAY = "GlobalDecay"
OUTCOME_BLOWUP = "Blowup"
OUTCOME_UNDETERMINED = "Undetermined"

# The time-weighted monitor of a diffusing positive lump approaches a
# mass-proportional plateau from below (and the periodic box adds a slow
# upward drift once the support feels the period), so "non-increasing"
# carries an operational slack per snapshot gap, and "net growth" must
# clear a margin over the whole tail quarter.
DECAY_SLACK = 2e-3
GROWTH_MARGIN = 5e-3


@dataclass(frozen=True)
class StepperConfig:
    """Time-marching parameters for :func:`run`."""

    dt_init: float = 1e-3
    dt_min: float = 1e-12
    dt_max: float = 0.25
    safety: float = 0.8
    blowup_threshold: float = 1e8
    t_end: float = 1.0
    snapshot_times: tuple[float, ...] = ()
    # target for the embedded predictor/corrector error estimate
    rtol: float = 1e-4
    atol: float = 1e-12
    cfl_safety: float = 0.5
    pm_exponents: tuple[float, ...] | None = None
    lp_exponents: tuple[float, ...] | None = None
    ep_exponents: tuple[float, ...] | None = None
    morrey: bool = True
    snapshot_dir: str | None = None

    def __post_init__(self) -> None:
        if not 0 < self.dt_min <= self.dt_init <= self.dt_max:
            raise ConfigError(
                f"need 0 < dt_min <= dt_init <= dt_max, got "
                f"({self.dt_min}, {self.dt_init}, {self.dt_max})"
            )
        if not self.blowup_threshold > 0:
            raise ConfigError("blowup_threshold must be positive")
        if not 0 < self.safety <= 1:
            raise ConfigError(f"safety must lie in (0, 1], got {self.safety}")
        if not self.t_end > 0:
            raise ConfigError(f"t_end must be positive, got {self.t_end}")
        if not self.rtol > 0:
            raise ConfigError("rtol must be positive")
        if any(t < 0 for t in self.snapshot_times):
            raise ConfigError("snapshot times must be nonnegative")


@dataclass
class TrajectorySummary:
    """Outcome of one :func:`run` call."""

    outcome: str
    t_final: float
    blowup_time: float | None = None
    norm_series: list[tuple[float, NormReport]] = dc_field(default_factory=list)
    steps: int = 0


def _advance_phi(
    state: CoupledState,
    spec: SystemSpec,
    dt: float,
    u_new: SpectralField,
) -> SpectralField | None:
    if spec.model == "NLH":
        return None
    if spec.model == "PE":
        return elliptic_phi(u_new)
    assert state.phi is not None
    return phi_exact_update(state.phi, [state.u, u_new], spec.tau, spec.alpha, dt)


def _attempt_step(
    state: CoupledState, spec: SystemSpec, dt: float
) -> tuple[CoupledState, float]:
    """One ETD-RK2 step; returns the new state and the raw embedded error."""
    grid = state.u.grid
    t_new = state.time + dt
    xi2 = xi_squared(grid)
    decay = np.exp(-dt * xi2)
    phi1, phi2 = _duhamel_weights(dt * xi2, dt)

    with np.errstate(over="ignore", invalid="ignore"):
        n1 = nonlinearity(state, spec).coeffs
        ua = decay * state.u.coeffs + phi1 * n1
        ua_field = SpectralField(grid, ua, t_new)
        phi_a = _advance_phi(state, spec, dt, ua_field)
        state_a = CoupledState(ua_field, phi_a, t_new)

        n2 = nonlinearity(state_a, spec).coeffs
        correction = phi2 * (n2 - n1)
        u_new = SpectralField(grid, ua + correction, t_new)
        phi_new = _advance_phi(state, spec, dt, u_new)
        err = float(np.max(np.abs(correction)))
    return CoupledState(u_new, phi_new, t_new), err


def step(state: CoupledState, spec: SystemSpec, dt: float) -> CoupledState:
    """Advance one deterministic ETD-RK2 step of size dt.

    Raises
    ------
    NonFinite
        If any coefficient is NaN or Inf afterwards.
    """
    if dt <= 0:
        raise ConfigError(f"dt must be positive, got {dt}")
    if spec.needs_phi and spec.model != "PE" and state.phi is None:
        raise ModelMismatch(f"model {spec.model} needs an initial chemoattractant")
    new_state, _ = _attempt_step(state, spec, dt)
    if not np.all(np.isfinite(new_state.u.coeffs)):
        raise NonFinite(f"non-finite coefficients after step at t={state.time}")
    return new_state


def _sup_norm(state: CoupledState) -> float:
    vals = from_spectral(state.u).values
    return float(np.max(np.abs(vals)))


def _grad_phi_sup(state: CoupledState) -> float:
    if state.phi is None:
        return 0.0
    from .models import gradient_physical

    comps = gradient_physical(state.phi)
    return max(float(np.max(np.abs(c))) for c in comps)


def _exceeded(state: CoupledState, threshold: float) -> bool:
    if not np.all(np.isfinite(state.u.coeffs)):
        return True
    return _sup_norm(state) > threshold


def _bisect_blowup(
    state: CoupledState, spec: SystemSpec, dt: float, cfg: StepperConfig
) -> float:
    """Bracket the first threshold crossing inside (t, t+dt] to within dt_min."""
    lo_state = state
    lo, hi = state.time, state.time + dt
    while hi - lo > cfg.dt_min:
        mid_dt = (hi - lo) / 2
        try:
            trial, _ = _attempt_step(lo_state, spec, mid_dt)
        except FloatingPointError:
            hi = lo + mid_dt
            continue
        if _exceeded(trial, cfg.blowup_threshold):
            hi = lo + mid_dt
        else:
            lo_state = trial
            lo = trial.time
    return 0.5 * (lo + hi)


def _prepare_state(state0: CoupledState, spec: SystemSpec) -> CoupledState:
    """Truncate data to the dealias band and normalize the phi slot."""
    u = dealias(state0.u)
    u.time_tag = state0.time
    if spec.model == "NLH":
        phi = None
    elif spec.model == "PE":
        phi = elliptic_phi(u)
    else:
        if state0.phi is None:
            raise ModelMismatch(f"model {spec.model} needs an initial chemoattractant")
        phi = dealias(state0.phi)
        phi.time_tag = state0.time
    return CoupledState(u, phi, state0.time)


def _emit(
    state: CoupledState, cfg: StepperConfig, series: list[tuple[float, NormReport]]
) -> None:
    report = compute_report(
        state.u,
        state.time,
        pm_exponents=cfg.pm_exponents,
        lp_exponents=cfg.lp_exponents,
        ep_exponents=cfg.ep_exponents,
        morrey=cfg.morrey,
    )
    series.append((state.time, report))
    if cfg.snapshot_dir is not None:
        os.makedirs(cfg.snapshot_dir, exist_ok=True)
        idx = len(series) - 1
        write_ksf1(state.u, os.path.join(cfg.snapshot_dir, f"u_{idx:04d}.ksf1"))
        if state.phi is not None:
            write_ksf1(state.phi, os.path.join(cfg.snapshot_dir, f"phi_{idx:04d}.ksf1"))


def decay_monitor_values(summary: TrajectorySummary, d: int) -> list[float]:
    """The t^(1-1/2) ||u||_d series run() bases its decay verdict on."""
    p = float(d)
    return [rep.ep_monitor.get(p, math.nan) for _, rep in summary.norm_series]


def _non_increasing(tail: list[float]) -> bool:
    return all(b <= a * (1 + DECAY_SLACK) + 1e-300 for a, b in zip(tail, tail[1:]))


def run(state0: CoupledState, spec: SystemSpec, cfg: StepperConfig) -> TrajectorySummary:
    """March to t_end or to detected blowup, reporting norms at snapshots.

    The verdict is ``GlobalDecay`` when t_end is reached and the
    time-weighted L^d monitor is non-increasing over the last quarter of
    the snapshots, ``Blowup`` when the sup norm crossed the threshold
    (the crossing time is then bracketed to within dt_min by re-stepping
    the offending interval), and ``Undetermined`` otherwise.
    """
    state = _prepare_state(state0, spec)
    d = state.u.grid.d
    if float(d) not in (cfg.ep_exponents or (float(d),)):
        raise ConfigError("ep_exponents must include p = d for the decay verdict")
    t0 = state.time
    if cfg.t_end <= t0:
        raise ConfigError(f"t_end={cfg.t_end} does not exceed start time {t0}")

    snaps = sorted({t for t in cfg.snapshot_times if t0 < t <= cfg.t_end} | {cfg.t_end})
    series: list[tuple[float, NormReport]] = []
    steps = 0
    dt = min(cfg.dt_init, cfg.dt_max)
    snap_idx = 0
    tiny = 1e-14 * max(1.0, cfg.t_end)

    while state.time < cfg.t_end - tiny:
        target = min(cfg.t_end, snaps[snap_idx]) if snap_idx < len(snaps) else cfg.t_end
        dt_try = min(dt, target - state.time)
        if spec.needs_phi:
            gmax = _grad_phi_sup(state)
            dt_cfl = cfg.cfl_safety / (gmax * state.u.grid.xi_max + 1e-300)
            dt_try = min(dt_try, max(dt_cfl, cfg.dt_min))
        dt_try = max(dt_try, cfg.dt_min)

        new_state, err = _attempt_step(state, spec, dt_try)
        finite = bool(np.all(np.isfinite(new_state.u.coeffs)))
        if finite:
            scale = cfg.atol + cfg.rtol * float(np.max(np.abs(new_state.u.coeffs)))
            ratio = err / scale
        else:
            ratio = math.inf

        if ratio > 1.0 and dt_try > cfg.dt_min:
            dt = max(cfg.dt_min, dt_try * max(0.2, cfg.safety / math.sqrt(ratio)))
            continue

        if not finite or _exceeded(new_state, cfg.blowup_threshold):
            blowup_time = _bisect_blowup(state, spec, dt_try, cfg)
            return TrajectorySummary(
                outcome=OUTCOME_BLOWUP,
                t_final=blowup_time,
                blowup_time=blowup_time,
                norm_series=series,
                steps=steps,
            )

        state = new_state
        steps += 1
        grow = 2.0 if ratio == 0.0 else min(5.0, cfg.safety / math.sqrt(ratio))
        dt = min(cfg.dt_max, max(cfg.dt_min, dt_try * max(grow, 0.2)))

        while snap_idx < len(snaps) and state.time >= snaps[snap_idx] - tiny:
            _emit(state, cfg, series)
            snap_idx += 1

    monitor = [rep.ep_monitor.get(float(d), math.nan) for _, rep in series]
    quarter = monitor[-max(1, math.ceil(len(monitor) / 4)):]
    decayed = (
        len(quarter) > 0
        and all(math.isfinite(m) for m in quarter)
        and _non_increasing(quarter)
    )
    return TrajectorySummary(
        outcome=OUTCOME_DECAY if decayed else OUTCOME_UNDETERMINED,
        t_final=state.time,
        blowup_time=None,
        norm_series=series,
        steps=steps,
    )


def march_states(
    state0: CoupledState,
    spec: SystemSpec,
    cfg: StepperConfig,
    times: list[float],
) -> list[CoupledState]:
    """Advance adaptively and return state copies at the requested times.

    For trajectories that are expected to stay bounded; a threshold
    crossing or non-finite step raises :class:`NonFinite` instead of the
    bisection bookkeeping :func:`run` performs.
    """
    state = _prepare_state(state0, spec)
    targets = sorted({float(t) for t in times if t > state.time})
    if not targets:
        return []
    out: list[CoupledState] = []
    dt = min(cfg.dt_init, cfg.dt_max)
    idx = 0
    tiny = 1e-14 * max(1.0, targets[-1])
    while idx < len(targets):
        dt_try = min(dt, targets[idx] - state.time)
        if spec.needs_phi:
            gmax = _grad_phi_sup(state)
            dt_cfl = cfg.cfl_safety / (gmax * state.u.grid.xi_max + 1e-300)
            dt_try = min(dt_try, max(dt_cfl, cfg.dt_min))
        dt_try = max(dt_try, cfg.dt_min)
        new_state, err = _attempt_step(state, spec, dt_try)
        if not np.all(np.isfinite(new_state.u.coeffs)):
            raise NonFinite(f"trajectory left the finite range at t={state.time}")
        scale = cfg.atol + cfg.rtol * float(np.max(np.abs(new_state.u.coeffs)))
        ratio = err / scale
        if ratio > 1.0 and dt_try > cfg.dt_min:
            dt = max(cfg.dt_min, dt_try * max(0.2, cfg.safety / math.sqrt(ratio)))
            continue
        if _exceeded(new_state, cfg.blowup_threshold):
            raise NonFinite(f"sup norm crossed the threshold at t={new_state.time}")
        state = new_state
        grow = 2.0 if ratio == 0.0 else min(5.0, cfg.safety / math.sqrt(ratio))
        dt = min(cfg.dt_max, max(cfg.dt_min, dt_try * max(grow, 0.2)))
        while idx < len(targets) and state.time >= targets[idx] - tiny:
            out.append(state.copy())
            idx += 1
    return out


def growthy(summary: TrajectorySummary, d: int) -> bool:
    """True when a run ended in blowup or its decay monitor trended upward.

    Used by the bisection harness to classify probes: the complement of
    GlobalDecay is split into net growth (treated as the high side of
    the bracket) and everything else.
    """
    if summary.outcome == OUTCOME_BLOWUP:
        return True
    if summary.outcome == OUTCOME_DECAY:
        return False
    vals = [m for m in decay_monitor_values(summary, d) if math.isfinite(m)]
    if len(vals) < 2:
        return False
    tail = vals[-max(2, math.ceil(len(vals) / 4)):]
    return tail[-1] > tail[0] * (1 + GROWTH_MARGIN)
