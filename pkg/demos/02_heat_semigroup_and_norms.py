"""Scale-invariant norms under the heat semigroup.

The time-weighted L2 monitor of the heat-evolved unit Gaussian climbs
to (1/2) sqrt(pi/2); the flat-spectrum norm of the same data is pi; the
smoothing ratios stay below the Young's-inequality constants.
"""

import math

import numpy as np

from kslab import GridSpec, PhysicalField, to_spectral
from kslab.grid import from_spectral, radius_squared
from kslab.norms import (
    besov_norm,
    ep_weight,
    heat_flow,
    lp_norm,
    morrey_norm_d2,
    pm_norm,
    young_smoothing_constant,
)

grid = GridSpec(d=2, n=512, box_length=192.0)
u0 = to_spectral(PhysicalField(grid, np.exp(-radius_squared(grid))))

print(f"flat-spectrum norm of the unit Gaussian: {pm_norm(u0, 0.0):.6f} (= pi)")
print(f"Morrey M^(d/2) estimate:                 {morrey_norm_d2(from_spectral(u0)):.6f}")

print("\ntime-weighted L2 monitor of the heat flow:")
for t in (0.01, 0.1, 1.0, 10.0, 100.0):
    val = ep_weight(t, 2.0, 2) * lp_norm(from_spectral(heat_flow(u0, t)), 2.0)
    print(f"  t = {t:7.2f}: {val:.6f}")
target = 0.5 * math.sqrt(math.pi / 2)
val = besov_norm(u0, 2.0, np.geomspace(1e-3, 400.0, 40))
print(f"heat-characterization norm: {val:.6f}  (limit (1/2) sqrt(pi/2) = {target:.6f})")

print("\nsmoothing ratios vs the quadrature kernel constants (should stay below 1):")
small = GridSpec(d=2, n=128, box_length=40.0)
rng = np.random.default_rng(0)
f0 = heat_flow(to_spectral(PhysicalField(small, rng.standard_normal(small.shape))), 0.2)
for p, q in ((1.0, 2.0), (2.0, math.inf), (1.0, math.inf)):
    bound = young_smoothing_constant(p, q, 2)
    base = lp_norm(from_spectral(f0), p)
    worst = 0.0
    for t in np.geomspace(1e-3, 10.0, 12):
        qinv = 0.0 if math.isinf(q) else 1.0 / q
        ratio = t ** ((1.0 / p - qinv)) * lp_norm(from_spectral(heat_flow(f0, t)), q) / base
        worst = max(worst, ratio / bound)
    print(f"  (p, q) = ({p:g}, {q:g}): worst ratio / bound = {worst:.3f}")
