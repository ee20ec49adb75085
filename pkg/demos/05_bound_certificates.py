"""Analytic constants checked two independent ways.

The convolution constant's closed Gamma form is compared against direct
radial quadrature; the exponential-kernel integral is certified against
its claimed bound on random parameters; the bilinear coefficient's
cubic blowup rate in the exponent parameter is exhibited.
"""

import math

import numpy as np

from kslab.bounds import (
    admissible_riesz_sample,
    bilinear_K,
    heat_constant,
    integral_lemma_check,
    riesz_constant,
    riesz_convolution_oracle,
)

print(f"C(2, 2, 3) = {riesz_constant(2, 2, 3):.10f}  (pi^3 = {math.pi**3:.10f})")
print(f"C(3/2, 3/2, 2) = {riesz_constant(1.5, 1.5, 2):.10f}")
expected = math.pi * math.gamma(0.25) ** 2 / math.gamma(0.75) ** 2
print(f"   pi Gamma(1/4)^2 / Gamma(3/4)^2 = {expected:.10f}")

print("\nclosed form vs convolution quadrature at random admissible points:")
for d in (2, 3):
    alphas, betas = admissible_riesz_sample(d, 4, seed=d)
    for a, b in zip(alphas, betas):
        c1 = riesz_constant(a, b, d)
        c2 = riesz_convolution_oracle(a, b, d)
        print(f"  d={d} (a, b)=({a:.3f}, {b:.3f}): {c1:.6f} vs {c2:.6f} "
              f"(rel {abs(c2 - c1) / c1:.1e})")

print("\nexponential-kernel certificates on random parameters:")
rng = np.random.default_rng(1)
for _ in range(5):
    s, A = float(rng.uniform(0.1, 10)), float(rng.uniform(0.1, 100))
    delta, b = float(rng.uniform(0.05, 3)), float(rng.uniform(0, 1))
    cert = integral_lemma_check(s, A, delta, b)
    print(f"  s={s:5.2f} A={A:6.2f} delta={delta:4.2f} b={b:4.2f}: "
          f"ratio={cert.worst_ratio:.3f} passed={cert.passed}")

print("\nbilinear coefficient times b^3 (cubic rate at small b):")
for d in (2, 3):
    row = {b: bilinear_K(d - 4 * b / 3, b, d) * b**3 for b in (0.005, 0.05, 0.25, 1.0)}
    print(f"  d={d}: " + ", ".join(f"b={b:g}: {v:.3f}" for b, v in row.items()))

print("\nheat constant stays at or below one on [d-2, d):")
for d in (2, 3):
    vals = [heat_constant(a, d) for a in np.linspace(d - 2, d - 1e-9, 9)]
    print(f"  d={d}: max = {max(vals):.6f}")
