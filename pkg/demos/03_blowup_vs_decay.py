"""Blowup detection on the quadratic heat equation, and a taste of the
relaxation-time threshold for the toy model.

Uniform data reduce the quadratic heat equation to u' = u^2, so the
u0 = 1 run must blow up at t = 1 (and u0 = -1 must relax like
-1/(1+t)).  The toy-model probes show the decay/growth dichotomy
shifting to larger amplitudes as the relaxation time grows.
"""

import math

import numpy as np

from kslab import GridSpec, StepperConfig, SystemSpec, run
from kslab.grid import zero_spectral
from kslab.initdata import InitSpec, make
from kslab.models import CoupledState, uniform_state

grid = GridSpec(d=2, n=32, box_length=10.0)
nlh = SystemSpec(model="NLH", d=2)

summary = run(uniform_state(grid, 1.0, None), nlh,
              StepperConfig(t_end=2.0, dt_max=0.05, rtol=1e-6))
print(f"u0 = +1: outcome={summary.outcome}, blowup_time={summary.blowup_time:.6f} (exact: 1)")

summary = run(uniform_state(grid, -1.0, None), nlh,
              StepperConfig(t_end=4.0, dt_max=0.02,
                            snapshot_times=tuple(np.linspace(0.5, 4.0, 8)), morrey=False))
print(f"u0 = -1: outcome={summary.outcome} (relaxes on -1/(1+t))")

print("\ntoy-model probes (growing relaxation time admits larger data):")
g2 = GridSpec(d=2, n=64, box_length=20 * np.pi)
for k in (3, 5):
    tau = math.exp(k)
    for M in (2.0, 128.0):
        u0 = make(InitSpec(family="Gaussian", amplitude=M, width=1.0), g2)
        state = CoupledState(u0, zero_spectral(g2), 0.0)
        cfg = StepperConfig(t_end=60.0, dt_max=0.25,
                            snapshot_times=tuple(np.linspace(7.5, 60, 16)), morrey=False)
        s = run(state, SystemSpec(model="TM2", d=2, tau=tau), cfg)
        extra = f" blowup_time={s.blowup_time:.1f}" if s.blowup_time else ""
        print(f"  tau=e^{k}, M={M:6.1f}: {s.outcome}{extra}")
