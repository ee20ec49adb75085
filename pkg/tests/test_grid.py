"""Transform conventions, dealiasing, and the KSF1 snapshot format."""

import numpy as np
import pytest

from kslab.errors import ConfigError, SymmetryViolation
from kslab.grid import (
    GridSpec,
    PhysicalField,
    SpectralField,
    dealias,
    evaluate_scaled,
    from_spectral,
    hermitian_defect,
    keep_mask,
    radius_squared,
    read_ksf1,
    to_spectral,
    wrapped_indices,
    write_ksf1,
    zero_spectral,
)


def random_field(grid, seed=0):
    rng = np.random.default_rng(seed)
    return PhysicalField(grid, rng.standard_normal(grid.shape))


class TestGridSpec:
    def test_invariants_enforced(self):
        with pytest.raises(ConfigError):
            GridSpec(d=5, n=16, box_length=1.0)
        with pytest.raises(ConfigError):
            GridSpec(d=2, n=24, box_length=1.0)  # not a power of two
        with pytest.raises(ConfigError):
            GridSpec(d=2, n=4, box_length=1.0)
        with pytest.raises(ConfigError):
            GridSpec(d=2, n=16, box_length=-1.0)
        with pytest.raises(ConfigError):
            GridSpec(d=2, n=16, box_length=1.0, dealias_fraction=0.0)

    def test_wavenumber_wrap_range(self):
        grid = GridSpec(d=2, n=16, box_length=2 * np.pi)
        k = wrapped_indices(grid)
        assert k.min() == -8 and k.max() == 7
        assert grid.xi_max == pytest.approx(np.pi * 16 / (2 * np.pi) * np.sqrt(2))


class TestTransforms:
    def test_constant_field_hits_zero_mode_only(self):
        grid = GridSpec(d=2, n=16, box_length=3.0)
        c = 2.5
        F = to_spectral(PhysicalField(grid, np.full(grid.shape, c)))
        assert F.coeffs[0, 0] == pytest.approx(c * grid.volume)
        rest = F.coeffs.copy()
        rest[0, 0] = 0.0
        assert np.max(np.abs(rest)) < 1e-12 * abs(c * grid.volume)

    def test_single_cosine_mode(self):
        grid = GridSpec(d=2, n=32, box_length=5.0)
        x1 = -grid.box_length / 2 + grid.dx * np.arange(grid.n)
        vals = np.cos(2 * np.pi * x1 / grid.box_length)[:, None] * np.ones(grid.n)
        F = to_spectral(PhysicalField(grid, vals))
        expected = grid.volume / 2
        assert F.coeffs[1, 0] == pytest.approx(expected, rel=1e-12)
        assert F.coeffs[-1, 0] == pytest.approx(expected, rel=1e-12)
        others = F.coeffs.copy()
        others[1, 0] = others[-1, 0] = 0.0
        assert np.max(np.abs(others)) < 1e-10 * expected

    def test_gaussian_zero_mode_matches_continuum(self):
        # integral of exp(-|x|^2) over the plane is pi; tails are < 1e-12 at L=40
        grid = GridSpec(d=2, n=128, box_length=40.0)
        F = to_spectral(PhysicalField(grid, np.exp(-radius_squared(grid))))
        assert F.coeffs[0, 0].real == pytest.approx(np.pi, rel=1e-8)

    def test_roundtrip_identity(self):
        grid = GridSpec(d=2, n=32, box_length=7.0)
        f = random_field(grid)
        g = from_spectral(to_spectral(f))
        assert np.max(np.abs(g.values - f.values)) < 1e-12 * np.max(np.abs(f.values))

    def test_roundtrip_3d(self):
        grid = GridSpec(d=3, n=16, box_length=2.0)
        f = random_field(grid, seed=3)
        g = from_spectral(to_spectral(f))
        assert np.max(np.abs(g.values - f.values)) < 1e-12 * np.max(np.abs(f.values))

    def test_zero_coeffs_give_zero_field(self):
        grid = GridSpec(d=2, n=16, box_length=1.0)
        assert np.all(from_spectral(zero_spectral(grid)).values == 0.0)

    def test_non_hermitian_raises(self):
        grid = GridSpec(d=2, n=16, box_length=1.0)
        F = zero_spectral(grid)
        F.coeffs[1, 2] = 1.0  # no conjugate partner
        with pytest.raises(SymmetryViolation):
            from_spectral(F)

    def test_linearity(self):
        grid = GridSpec(d=2, n=32, box_length=3.0)
        f, g = random_field(grid, 1), random_field(grid, 2)
        a, b = 1.7, -0.3
        lhs = to_spectral(PhysicalField(grid, a * f.values + b * g.values)).coeffs
        rhs = a * to_spectral(f).coeffs + b * to_spectral(g).coeffs
        assert np.max(np.abs(lhs - rhs)) <= 1e-12 * np.max(np.abs(rhs))

    def test_parseval(self):
        # volume * mean(|f|^2) == sum(|coeffs|^2) / volume under our scaling
        grid = GridSpec(d=2, n=64, box_length=11.0)
        f = random_field(grid, 4)
        F = to_spectral(f)
        phys = np.sum(np.abs(f.values) ** 2) * grid.cell_volume
        spec = np.sum(np.abs(F.coeffs) ** 2) / grid.volume
        assert phys == pytest.approx(spec, rel=1e-10)

    def test_hermitian_preserved_by_dealias(self):
        grid = GridSpec(d=2, n=32, box_length=2.0)
        F = to_spectral(random_field(grid, 5))
        assert hermitian_defect(F) < 1e-13
        assert hermitian_defect(dealias(F)) < 1e-13


class TestDealias:
    def test_low_modes_untouched(self):
        grid = GridSpec(d=2, n=32, box_length=1.0)
        F = to_spectral(random_field(grid, 6))
        G = dealias(F)
        m = keep_mask(grid)
        assert np.array_equal(G.coeffs[m], F.coeffs[m])
        assert np.all(G.coeffs[~m] == 0.0)

    def test_cutoff_arithmetic_n128(self):
        # fraction 2/3 at n=128: cutoff 42.67, so |k| = 43 dies and 42 survives
        grid = GridSpec(d=2, n=128, box_length=1.0)
        F = zero_spectral(grid)
        F.coeffs[43, 0] = 1.0
        F.coeffs[42, 1] = 1.0
        G = dealias(F)
        assert G.coeffs[43, 0] == 0.0
        assert G.coeffs[42, 1] == 1.0

    def test_constant_survives(self):
        grid = GridSpec(d=2, n=16, box_length=1.0)
        F = zero_spectral(grid)
        F.coeffs[0, 0] = 3.0
        assert dealias(F).coeffs[0, 0] == 3.0


class TestScaledEvaluation:
    def test_identity_at_unit_scale(self):
        grid = GridSpec(d=2, n=32, box_length=4.0)
        F = dealias(to_spectral(random_field(grid, 7)))
        g = evaluate_scaled(F, 1.0)
        f = from_spectral(F)
        assert np.max(np.abs(g.values - f.values)) < 1e-10 * np.max(np.abs(f.values))

    def test_matches_analytic_rescaling_of_gaussian(self):
        grid = GridSpec(d=2, n=128, box_length=24.0)
        f = PhysicalField(grid, np.exp(-radius_squared(grid)))
        F = to_spectral(f)
        lam = 0.5
        g = evaluate_scaled(F, lam)
        expected = np.exp(-(lam**2) * radius_squared(grid))
        assert np.max(np.abs(g.values - expected)) < 1e-9


class TestKSF1:
    def test_roundtrip(self, tmp_path):
        grid = GridSpec(d=3, n=8, box_length=2.5)
        F = to_spectral(random_field(grid, 8), time_tag=0.75)
        path = tmp_path / "snap.ksf1"
        write_ksf1(F, path)
        G = read_ksf1(path)
        assert G.grid == grid
        assert G.time_tag == 0.75
        assert np.array_equal(G.coeffs, F.coeffs)

    def test_header_layout(self, tmp_path):
        grid = GridSpec(d=2, n=8, box_length=1.5)
        F = zero_spectral(grid, time_tag=2.0)
        path = tmp_path / "snap.ksf1"
        write_ksf1(F, path)
        raw = path.read_bytes()
        assert raw[:4] == b"KSF1"
        assert int.from_bytes(raw[4:8], "little") == 2
        assert int.from_bytes(raw[8:12], "little") == 8
        assert np.frombuffer(raw[12:20], "<f8")[0] == 1.5
        assert np.frombuffer(raw[20:28], "<f8")[0] == 2.0
        assert len(raw) == 28 + 16 * 8 * 8

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "bad.ksf1"
        path.write_bytes(b"NOPE" + b"\x00" * 64)
        with pytest.raises(ConfigError):
            read_ksf1(path)
