"""Norm estimators against closed forms and quadrature oracles."""

import math

import numpy as np
import pytest
from scipy import integrate

from kslab.errors import BadExponent
from kslab.grid import (
    GridSpec,
    PhysicalField,
    SpectralField,
    radius_squared,
    to_spectral,
    xi_squared,
    zero_spectral,
)
from kslab.norms import (
    NormReport,
    besov_norm,
    compute_report,
    ep_monitor,
    heat_flow,
    lp_norm,
    morrey_norm_d2,
    pm_norm,
    young_smoothing_constant,
)


def gaussian_field(grid, amplitude=1.0, width=1.0):
    return PhysicalField(grid, amplitude * np.exp(-radius_squared(grid) / width**2))


def smooth_random(grid, seed=0, smoothing=0.5):
    rng = np.random.default_rng(seed)
    F = to_spectral(PhysicalField(grid, rng.standard_normal(grid.shape)))
    return heat_flow(F, smoothing)


class TestPmNorm:
    def test_flat_spectrum_gives_amplitude(self):
        grid = GridSpec(d=2, n=32, box_length=5.0)
        F = zero_spectral(grid)
        F.coeffs[:] = 2.0
        assert pm_norm(F, 0.0) == pytest.approx(2.0)

    def test_gaussian_flat_norm_is_pi(self):
        grid = GridSpec(d=2, n=128, box_length=40.0)
        F = to_spectral(gaussian_field(grid))
        assert pm_norm(F, 0.0) == pytest.approx(np.pi, rel=1e-8)

    def test_synthetic_power_law_cancels(self):
        grid = GridSpec(d=3, n=16, box_length=2 * np.pi)
        xi2 = xi_squared(grid)
        with np.errstate(divide="ignore"):
            coeffs = np.where(xi2 > 0, xi2 ** (-(grid.d - 2) / 2), 0.0)
        F = SpectralField(grid, coeffs.astype(complex))
        assert pm_norm(F, grid.d - 2) == pytest.approx(1.0, rel=1e-12)

    def test_bad_exponent(self):
        grid = GridSpec(d=2, n=16, box_length=1.0)
        F = zero_spectral(grid)
        with pytest.raises(BadExponent):
            pm_norm(F, -0.5)
        with pytest.raises(BadExponent):
            pm_norm(F, 2.0)

    def test_rescaling_invariance_at_critical_exponent(self):
        # u_lam(x) = lam^2 u(lam x) realized on the grid pair (n, L) and (n, L/lam)
        d, n, L, lam = 3, 32, 12.0, 2.0
        grid1 = GridSpec(d=d, n=n, box_length=L)
        grid2 = GridSpec(d=d, n=n, box_length=L / lam)
        f1 = smooth_random(grid1, seed=9, smoothing=0.2)
        from kslab.grid import from_spectral

        u1 = from_spectral(f1).values
        f2 = to_spectral(PhysicalField(grid2, lam**2 * u1))
        n1 = pm_norm(f1, d - 2)
        n2 = pm_norm(f2, d - 2)
        assert n2 == pytest.approx(n1, rel=1e-10)


class TestEpAndBesov:
    def test_zero_trajectory(self):
        grid = GridSpec(d=2, n=16, box_length=1.0)
        t_grid = [0.1, 1.0]
        traj = [zero_spectral(grid, t) for t in t_grid]
        assert ep_monitor(traj, 2.0, t_grid) == 0.0

    def test_heat_gaussian_limit_d2(self):
        # t^(1/2) ||e^(t Lap) e^(-|x|^2)||_2 converges to sqrt(pi/2)/2
        grid = GridSpec(d=2, n=512, box_length=192.0)
        u0 = to_spectral(gaussian_field(grid))
        t_grid = np.geomspace(1e-3, 400.0, 40)
        val = besov_norm(u0, 2.0, t_grid)
        assert val == pytest.approx(0.5 * math.sqrt(math.pi / 2), rel=1e-2)

    def test_homogeneity(self):
        grid = GridSpec(d=2, n=32, box_length=8.0)
        u0 = to_spectral(gaussian_field(grid))
        u2 = SpectralField(grid, 2.0 * u0.coeffs)
        t_grid = np.geomspace(1e-2, 3.0, 8)
        assert besov_norm(u2, 2.0, t_grid) == pytest.approx(
            2.0 * besov_norm(u0, 2.0, t_grid), rel=1e-12
        )

    def test_besov_needs_p_above_half_d(self):
        grid = GridSpec(d=3, n=16, box_length=4.0)
        u0 = to_spectral(gaussian_field(grid))
        with pytest.raises(BadExponent):
            besov_norm(u0, 1.5, [0.1, 1.0])

    def test_tail_of_heat_monitor_non_increasing(self):
        # mean-zero data: every surviving mode decays exponentially, which
        # eventually beats the polynomial time weight
        grid = GridSpec(d=2, n=32, box_length=6.0)
        u0 = smooth_random(grid, seed=2, smoothing=0.3)
        u0.coeffs[0, 0] = 0.0
        t_grid = np.geomspace(1.0, 50.0, 12)
        vals = [
            t ** (1 - 2 / (2 * 2.0)) * lp_norm__heat(u0, t, 2.0) for t in t_grid
        ]
        tail = vals[6:]
        assert all(b <= a * (1 + 1e-12) for a, b in zip(tail, tail[1:]))

    def test_hausdorff_young_comparison(self):
        # besov norm of the heat flow is controlled by the flat pseudomeasure
        # norm times a constant computed here by radial quadrature
        d, p = 2, 3.0
        pp = p / (p - 1)
        surface = 2 * math.pi ** (d / 2) / math.gamma(d / 2)
        integral, err = integrate.quad(
            lambda r: surface * r ** (d - 1 - (d - 2) * pp) * math.exp(-pp * r * r),
            0,
            np.inf,
        )
        assert err < 1e-7
        c_hy = (2 * math.pi) ** (-d / pp) * integral ** (1 / pp)
        grid = GridSpec(d=d, n=64, box_length=40.0)
        t_grid = np.geomspace(1e-3, 20.0, 24)
        for seed in range(3):
            u0 = smooth_random(grid, seed=seed, smoothing=0.4)
            lhs = besov_norm(u0, p, t_grid)
            rhs = c_hy * pm_norm(u0, d - 2)
            assert lhs <= rhs * (1 + 1e-6)


def lp_norm__heat(u0, t, p):
    from kslab.grid import from_spectral

    return lp_norm(from_spectral(heat_flow(u0, t)), p)


class TestHeatSmoothing:
    @pytest.mark.parametrize("pq", [(1.0, 2.0), (2.0, math.inf), (1.0, math.inf)])
    def test_ratio_bounded_by_young_constant(self, pq):
        p, q = pq
        d = 2
        grid = GridSpec(d=d, n=256, box_length=40.0)
        bound = 1.1 * young_smoothing_constant(p, q, d)
        from kslab.grid import from_spectral

        for seed in range(3):
            u0 = smooth_random(grid, seed=seed, smoothing=0.2)
            f = from_spectral(u0)
            base = lp_norm(f, p)
            for t in np.geomspace(1e-3, 10.0, 16):
                smoothed = lp_norm(from_spectral(heat_flow(u0, t)), q)
                ratio = t ** (d * (1 / p - (0 if math.isinf(q) else 1 / q)) / 2) * smoothed / base
                assert ratio <= bound


class TestMorrey:
    def test_zero(self):
        grid = GridSpec(d=2, n=16, box_length=1.0)
        assert morrey_norm_d2(PhysicalField(grid, np.zeros(grid.shape))) == 0.0

    def test_ball_bump_d3(self):
        grid = GridSpec(d=3, n=64, box_length=16.0)
        h, r = 1.5, 2.0  # r = L/8 is one of the dyadic radii
        vals = np.where(radius_squared(grid) < r**2, h, 0.0)
        f = PhysicalField(grid, vals)
        est = morrey_norm_d2(f)
        direct = np.sum(vals) * grid.cell_volume * r ** (2 - grid.d)
        assert est == pytest.approx(direct, rel=1e-12)
        assert est == pytest.approx(4 / 3 * math.pi * h * r**2, rel=0.1)

    def test_scaling(self):
        grid = GridSpec(d=2, n=32, box_length=8.0)
        f = gaussian_field(grid)
        doubled = PhysicalField(grid, 2 * f.values)
        assert morrey_norm_d2(doubled) == pytest.approx(2 * morrey_norm_d2(f), rel=1e-12)


class TestNormReport:
    def test_csv_layout(self):
        grid = GridSpec(d=2, n=32, box_length=10.0)
        u = to_spectral(gaussian_field(grid))
        rep = compute_report(u, time=0.5)
        header = rep.csv_header()
        row = rep.csv_row()
        assert header.split(",")[0] == "time"
        assert header.split(",")[-1] == "morrey"
        assert len(header.split(",")) == len(row.split(","))
        assert rep.finite

    def test_nonfinite_flagged(self):
        grid = GridSpec(d=2, n=16, box_length=1.0)
        F = zero_spectral(grid)
        F.coeffs[0, 0] = np.nan
        rep = compute_report(F, time=1.0)
        assert not rep.finite
