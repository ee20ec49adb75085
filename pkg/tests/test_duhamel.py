"""Mild-solution operators against direct kernel quadrature, and the
Picard iteration against the time stepper."""

import math

import numpy as np
import pytest

from kslab.duhamel import (
    PicardConfig,
    apply_B,
    apply_L,
    heat_trajectory,
    picard_solve,
    trajectory_ydistance,
    trajectory_ynorm,
)
from kslab.errors import Diverged, GridMismatch, ModelMismatch
from kslab.grid import (
    GridSpec,
    PhysicalField,
    SpectralField,
    dealias,
    radius_squared,
    to_spectral,
    zero_spectral,
)
from kslab.initdata import InitSpec, make
from kslab.models import CoupledState, SystemSpec


def unit_torus(n=16):
    # L = 2 pi makes every wavenumber an integer vector
    return GridSpec(d=2, n=n, box_length=2 * np.pi)


def mode_field(grid, index, amplitude):
    F = zero_spectral(grid)
    F.coeffs[index] = amplitude
    neg = tuple((-i) % grid.n for i in index)
    F.coeffs[neg] = np.conj(amplitude)
    return F


def interp_mode(nodes, traj, index):
    vals = np.array([F.coeffs[index] for F in traj])

    def at(s):
        return np.interp(s, nodes, vals.real) + 1j * np.interp(s, nodes, vals.imag)

    return at


_GL_X, _GL_W = np.polynomial.legendre.leggauss(10)


def piecewise_quad(f, breakpoints, lo, hi):
    """Fixed-order Gauss-Legendre between consecutive breakpoints.

    The integrands below are smooth except for kinks at the trajectory
    nodes, so integrating interval by interval restores full accuracy.
    """
    pts = [lo] + [b for b in breakpoints if lo < b < hi] + [hi]
    total = 0.0
    for x0, x1 in zip(pts, pts[1:]):
        mid, half = 0.5 * (x0 + x1), 0.5 * (x1 - x0)
        total += half * sum(w * f(mid + half * x) for x, w in zip(_GL_X, _GL_W))
    return total


class TestApplyL:
    def test_zero_phi_gives_zero(self):
        grid = unit_torus()
        traj = heat_trajectory(mode_field(grid, (1, 0), 1.0), [0.5, 1.0])
        out = apply_L(traj, zero_spectral(grid), tau=1.0, t_grid=[0.5, 1.0])
        assert all(np.max(np.abs(F.coeffs)) == 0.0 for F in out)

    def test_zero_u_gives_zero(self):
        grid = unit_torus()
        traj = [zero_spectral(grid, t) for t in (0.0, 0.5, 1.0)]
        out = apply_L(traj, mode_field(grid, (0, 1), 1.0), tau=1.0, t_grid=[0.5, 1.0])
        assert all(np.max(np.abs(F.coeffs)) == 0.0 for F in out)

    def test_single_mode_against_kernel_quadrature(self):
        grid = unit_torus()
        tau = 1.7
        u_amp, phi_amp = 0.8, 1.3
        t_grid = np.geomspace(0.01, 2.0, 241)
        u_traj = heat_trajectory(mode_field(grid, (1, 0), u_amp), t_grid)
        phi0 = mode_field(grid, (0, 1), phi_amp)
        out = apply_L(u_traj, phi0, tau, t_grid, substeps=32)

        nodes = np.concatenate(([0.0], t_grid))
        eta_set = [((0, 1), np.array([0.0, 1.0])), ((0, -1 % grid.n), np.array([0.0, -1.0]))]
        xi1 = 2 * np.pi * np.fft.fftfreq(grid.n, d=2 * np.pi / grid.n)

        def oracle_at(xi_idx, t):
            xi = np.array([xi1[xi_idx[0]], xi1[xi_idx[1]]])
            total = 0.0 + 0.0j
            for eta_idx, eta in eta_set:
                shift = tuple((xi_idx[k] - eta_idx[k]) % grid.n for k in range(2))
                u_at = interp_mode(nodes, u_traj, shift)
                phi_val = phi0.coeffs[eta_idx]
                dot = float(xi @ eta)
                if dot == 0.0 or phi_val == 0.0:
                    continue
                val = piecewise_quad(
                    lambda s: (
                        np.exp(-(t - s) * (xi @ xi))
                        * np.exp(-s * (eta @ eta) / tau)
                        * u_at(s)
                    ).real,
                    nodes,
                    0.0,
                    t,
                )
                total += dot * phi_val * val / grid.volume
            return total

        for node_idx in (120, 180, 240):
            t = nodes[node_idx]
            field = out[node_idx]
            ref_max = 0.0
            errs = []
            for xi_idx in [(1, 1), (1, -1 % grid.n), (-1 % grid.n, 1)]:
                ref = oracle_at(xi_idx, t)
                got = field.coeffs[xi_idx]
                ref_max = max(ref_max, abs(ref))
                errs.append(abs(got - ref))
            assert max(errs) <= 1e-6 * ref_max

    def test_grid_mismatch(self):
        grid = unit_torus()
        other = GridSpec(d=2, n=32, box_length=2 * np.pi)
        traj = heat_trajectory(mode_field(grid, (1, 0), 1.0), [0.5])
        with pytest.raises(GridMismatch):
            apply_L(traj, zero_spectral(other), tau=1.0, t_grid=[0.5])


class TestApplyB:
    def test_zero_v_gives_zero(self):
        grid = unit_torus()
        u_traj = heat_trajectory(mode_field(grid, (1, 0), 1.0), [0.5, 1.0])
        v_traj = [zero_spectral(grid, t) for t in (0.0, 0.5, 1.0)]
        out = apply_B(u_traj, v_traj, tau=1.0, t_grid=[0.5, 1.0])
        assert all(np.max(np.abs(F.coeffs)) == 0.0 for F in out)

    def test_bilinearity_in_first_slot(self):
        grid = unit_torus()
        t_grid = [0.25, 0.5, 1.0]
        u_traj = heat_trajectory(mode_field(grid, (1, 0), 1.0), t_grid)
        v_traj = heat_trajectory(mode_field(grid, (0, 1), 0.7), t_grid)
        scaled = [SpectralField(grid, 3.0 * F.coeffs, F.time_tag) for F in u_traj]
        b1 = apply_B(scaled, v_traj, tau=2.0, t_grid=t_grid)
        b2 = apply_B(u_traj, v_traj, tau=2.0, t_grid=t_grid)
        for F1, F2 in zip(b1[1:], b2[1:]):
            assert np.max(np.abs(F1.coeffs - 3.0 * F2.coeffs)) <= 1e-12 * np.max(
                np.abs(F1.coeffs)
            )

    def test_symmetrized_operator_order_independent(self):
        grid = unit_torus()
        t_grid = [0.25, 0.5]
        u_traj = heat_trajectory(mode_field(grid, (1, 0), 1.0), t_grid)
        v_traj = heat_trajectory(mode_field(grid, (0, 1), 0.7), t_grid)
        buv = apply_B(u_traj, v_traj, tau=1.0, t_grid=t_grid)
        bvu = apply_B(v_traj, u_traj, tau=1.0, t_grid=t_grid)
        for i in range(len(t_grid) + 1):
            s1 = buv[i].coeffs + bvu[i].coeffs
            s2 = bvu[i].coeffs + buv[i].coeffs
            assert np.max(np.abs(s1 - s2)) <= 1e-12 * max(np.max(np.abs(s1)), 1e-300)

    def test_single_mode_against_triple_quadrature(self):
        grid = unit_torus()
        tau = 1.3
        amp = 0.9
        t_grid = np.geomspace(0.05, 1.5, 25)
        traj = heat_trajectory(mode_field(grid, (1, 0), amp), t_grid)
        out = apply_B(traj, traj, tau, t_grid, substeps=48)

        nodes = np.concatenate(([0.0], t_grid))
        xi1 = 2 * np.pi * np.fft.fftfreq(grid.n, d=2 * np.pi / grid.n)
        eta_set = [((1, 0), np.array([1.0, 0.0])), ((-1 % grid.n, 0), np.array([-1.0, 0.0]))]

        def psi_hat(eta_idx, eta, s):
            v_at = interp_mode(nodes, traj, eta_idx)
            val = piecewise_quad(
                lambda sig: (
                    np.exp(-(s - sig) * (eta @ eta) / tau) * v_at(sig)
                ).real,
                nodes,
                0.0,
                s,
            )
            return val / tau

        def oracle_at(xi_idx, t):
            xi = np.array([xi1[xi_idx[0]], xi1[xi_idx[1]]])
            total = 0.0
            for eta_idx, eta in eta_set:
                dot = float(xi @ eta)
                if dot == 0.0:
                    continue
                shift = tuple((xi_idx[k] - eta_idx[k]) % grid.n for k in range(2))
                u_at = interp_mode(nodes, traj, shift)
                val = piecewise_quad(
                    lambda s: (np.exp(-(t - s) * (xi @ xi)) * u_at(s)).real
                    * psi_hat(eta_idx, eta, s),
                    nodes,
                    0.0,
                    t,
                )
                total += dot * val / grid.volume
            return total

        for node_idx in (12, 25):
            t = nodes[node_idx]
            field = out[node_idx]
            xi_idx = (2, 0)
            ref = oracle_at(xi_idx, t)
            got = field.coeffs[xi_idx].real
            assert abs(got - ref) <= 1e-5 * abs(ref)


class TestPicard:
    def test_zero_data_converges_immediately(self):
        grid = unit_torus()
        cfg = PicardConfig(t_grid=(0.1, 1.0, 10.0))
        report = picard_solve(
            zero_spectral(grid), zero_spectral(grid), SystemSpec(model="PP", d=2), cfg
        )
        assert report.converged and report.iters == 1
        assert report.ratio_series == []
        assert all(np.max(np.abs(F.coeffs)) == 0.0 for F in report.final)

    def test_requires_pp(self):
        grid = unit_torus()
        with pytest.raises(ModelMismatch):
            picard_solve(
                zero_spectral(grid),
                None,
                SystemSpec(model="NLH", d=2),
                PicardConfig(t_grid=(0.1, 1.0)),
            )

    def test_tiny_gaussian_matches_stepper(self):
        grid = GridSpec(d=2, n=64, box_length=20 * np.pi)
        width = 4.0
        target_pm = 1e-4
        amp = target_pm / (np.pi * width**2)
        u0 = dealias(make(InitSpec(family="Gaussian", amplitude=amp, width=width), grid))
        spec = SystemSpec(model="PP", d=2, tau=1.0)
        t_grid = tuple(np.geomspace(1e-3, 10.0, 32))
        cfg = PicardConfig(t_grid=t_grid, conv_tol=1e-10)
        report = picard_solve(u0, None, spec, cfg)
        assert report.converged
        assert report.iters <= 10

        # march the stepper landing exactly on the picard nodes
        from kslab.stepper import step

        phi0 = zero_spectral(grid)
        st = CoupledState(u0.copy(), phi0, 0.0)
        traj = [u0.copy()]
        t_prev = 0.0
        for t in t_grid:
            span = t - t_prev
            nsub = max(1, int(np.ceil(span / 0.05)))
            h = span / nsub
            for _ in range(nsub):
                st = step(st, spec, h)
            traj.append(st.u.copy())
            t_prev = t
        a = report.a
        dist = trajectory_ydistance(report.final, traj, t_grid, a)
        scale = trajectory_ynorm(traj, t_grid, a)
        assert dist <= 1e-6 * scale

    def test_divergence_reported_for_huge_data(self):
        grid = GridSpec(d=2, n=32, box_length=20 * np.pi)
        u0 = dealias(make(InitSpec(family="Gaussian", amplitude=300.0, width=2.0), grid))
        cfg = PicardConfig(t_grid=tuple(np.geomspace(1e-2, 10.0, 16)), max_iters=25)
        with pytest.raises(Diverged):
            picard_solve(u0, None, SystemSpec(model="PP", d=2, tau=1.0), cfg)

    def test_first_ratio_non_increasing_in_tau(self):
        grid = GridSpec(d=2, n=32, box_length=20 * np.pi)
        u0 = dealias(make(InitSpec(family="Gaussian", amplitude=1.0, width=2.0), grid))
        cfg = PicardConfig(t_grid=tuple(np.geomspace(1e-2, 10.0, 16)), max_iters=6,
                           conv_tol=1e-12)
        first = []
        for tau in (1.0, 10.0):
            rep = picard_solve(u0, None, SystemSpec(model="PP", d=2, tau=tau), cfg)
            first.append(rep.ratio_series[0])
        assert first[1] <= first[0] * (1 + 1e-9)

    def test_report_json_fields(self):
        grid = unit_torus()
        cfg = PicardConfig(t_grid=(0.1, 1.0))
        report = picard_solve(
            zero_spectral(grid), None, SystemSpec(model="PP", d=2), cfg
        )
        import json

        data = json.loads(report.to_json())
        assert set(data) == {"converged", "iters", "ynorm_series", "ratio_series", "a", "t_grid"}
