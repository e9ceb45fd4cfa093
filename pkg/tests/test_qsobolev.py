"""Tests for dyadic partitions, Kohn-Nirenberg quantization and the Q^s norm."""

import math

import numpy as np
import pytest

from phasefront.errors import DimensionMismatch, LevelOutOfBand
from phasefront.field_grid import GridSpec1D, SampledField, SignalSpec, synthesize
from phasefront.paradiff import random_bandlimited
from phasefront.qsobolev import (
    DyadicPartition,
    GridSymbol,
    PhasePartition,
    annulus,
    bump,
    holder_remainder_slope,
    kn_dense_matrix,
    kn_quantize,
    kn_quantize_many,
    kn_quantize_radial,
    level_masses,
    lowpass_linf_gain,
    lp_project,
    highpass_remainder,
    lp_sum_ratio,
    phase_cutoff_linf_gain,
    qs_norm,
    resolvable_phase_levels,
    zygmund_norm,
)


@pytest.fixture(scope="module")
def tiny_grid():
    return GridSpec1D(L=4.0, N=64)


def _gaussian(grid, x0=0.0):
    return SampledField(grid, np.exp(-0.5 * (grid.x - x0) ** 2))


class TestPartition:
    def test_bump(self):
        np.testing.assert_allclose(bump([0.0, 1.0, -1.0, 1.5, 2.0, 3.0]), [1, 1, 1, 0.5, 0, 0])

    def test_annulus(self):
        assert annulus(0) == (0.0, 2.0)
        assert annulus(3) == (4.0, 16.0)

    def test_levels_sum_to_cumulative(self):
        part = DyadicPartition(6)
        xi = np.linspace(-200, 200, 4001)
        total = sum(part.psi(k, xi) for k in range(7))
        np.testing.assert_allclose(total, part.cumulative(xi), atol=1e-13)

    @pytest.mark.parametrize("k", [1, 2, 5])
    def test_level_support(self, k):
        xi = np.linspace(0, 200, 20001)
        values = DyadicPartition(6).psi(k, xi)
        lo, hi = annulus(k)
        assert np.all(values[(xi < lo) | (xi > hi)] == 0.0)
        assert np.all(values >= -1e-15)

    def test_levels_for_grid(self, small_grid):
        part = DyadicPartition.for_grid(small_grid)
        assert part.levels == 6
        assert part.admitted(small_grid) == list(range(7))

    def test_level_out_of_band(self, small_grid):
        part = DyadicPartition(10)
        part.check_level(6, small_grid)
        with pytest.raises(LevelOutOfBand):
            part.check_level(7, small_grid)
        with pytest.raises(LevelOutOfBand):
            part.check_level(11, small_grid)
        with pytest.raises(LevelOutOfBand):
            lp_project(_gaussian(small_grid), part, 8)

    def test_phase_partition_is_radial(self):
        part = PhasePartition(4)
        assert part.phi(2, 3.0, 4.0) == pytest.approx(float(DyadicPartition(4).psi(2, 5.0)))
        assert part.phi(2, 3.0, -4.0) == part.phi(2, 3.0, 4.0)


class TestLevelMasses:
    def test_windowed_plane_wave_splits_between_two_levels(self):
        grid = GridSpec1D(L=40.0, N=512)
        u = SampledField(grid, np.exp(3j * grid.x - grid.x ** 2 / 32.0))
        masses = level_masses(u, DyadicPartition.for_grid(grid))
        assert masses[1] == pytest.approx(0.5, abs=1e-3)
        assert masses[2] == pytest.approx(0.5, abs=1e-3)
        assert sum(masses.values()) == pytest.approx(1.0, abs=1e-12)

    def test_projections_reassemble(self, small_grid):
        u = _gaussian(small_grid, 1.0)
        part = DyadicPartition.for_grid(small_grid)
        total = sum(lp_project(u, part, k).values for k in part.admitted(small_grid))
        np.testing.assert_allclose(total, u.values, atol=1e-12)


class TestNorms:
    def test_ground_state(self, small_grid):
        u = synthesize(SignalSpec.model_validate("hermite(0)"), small_grid)
        assert qs_norm(u, 0.0) == pytest.approx(1.0, rel=1e-12)
        assert qs_norm(u, 2.0) == pytest.approx(math.sqrt(2.75), rel=1e-10)

    def test_constant_is_dominated_by_space(self, small_grid):
        u = synthesize(SignalSpec(kind="constant"), small_grid)
        L = small_grid.L
        assert qs_norm(u, 1.0) == pytest.approx(math.sqrt(2 * L + 2 * L ** 3 / 3), rel=1e-4)

    @pytest.mark.parametrize("s", [-10.5, 11.0])
    def test_order_range(self, small_grid, s):
        with pytest.raises(ValueError):
            qs_norm(_gaussian(small_grid), s)

    def test_zygmund(self, small_grid):
        u = _gaussian(small_grid)
        assert 0.0 < zygmund_norm(u, 1.0) < math.inf
        with pytest.raises(ValueError):
            zygmund_norm(u, 0.0)

    def test_lp_sum_is_comparable_to_norm(self, small_grid):
        u = synthesize(SignalSpec.model_validate("hermite(0)"), small_grid)
        ratio = lp_sum_ratio(u, 1.0)
        assert 0.2 < ratio < 5.0


class TestQuantization:
    def test_unit_symbol_is_identity(self, small_grid):
        u = _gaussian(small_grid, 0.5)
        one = GridSymbol.from_function(small_grid, lambda X, XI: np.ones_like(X))
        np.testing.assert_allclose(kn_quantize(one, u).values, u.values, atol=1e-12)

    def test_position_and_momentum(self, small_grid):
        u = _gaussian(small_grid)
        x_symbol = GridSymbol.from_function(small_grid, lambda X, XI: X)
        xi_symbol = GridSymbol.from_function(small_grid, lambda X, XI: XI)
        x_u, d_u = kn_quantize_many([x_symbol, xi_symbol], u)
        np.testing.assert_allclose(x_u.values, small_grid.x * u.values, atol=1e-12)
        np.testing.assert_allclose(d_u.values, 1j * small_grid.x * u.values, atol=1e-10)

    def test_dense_matrix_agrees(self, tiny_grid):
        rng = np.random.default_rng(7)
        p = GridSymbol(tiny_grid, rng.standard_normal((64, 64)))
        u = SampledField(tiny_grid, rng.standard_normal(64) + 1j * rng.standard_normal(64))
        np.testing.assert_allclose(kn_dense_matrix(p) @ u.values, kn_quantize(p, u).values, atol=1e-12)

    def test_radial_matches_stored_symbol(self, small_grid):
        part = PhasePartition(2)
        u = _gaussian(small_grid, 2.0)
        radial = kn_quantize_radial([part.profile(1), part.cumulative_profile(2)], u)
        stored = kn_quantize_many([part.symbol(1, small_grid),
                                   GridSymbol.from_function(small_grid, part.cumulative)], u)
        for a, b in zip(radial, stored):
            np.testing.assert_allclose(a.values, b.values, atol=1e-12)

    def test_grid_mismatch(self, small_grid, tiny_grid):
        p = GridSymbol.from_function(tiny_grid, lambda X, XI: X)
        with pytest.raises(DimensionMismatch):
            kn_quantize(p, _gaussian(small_grid))
        with pytest.raises(DimensionMismatch):
            GridSymbol(small_grid, np.zeros((3, 3)))

    def test_phase_map_view(self, tiny_grid):
        pmap = GridSymbol.from_function(tiny_grid, lambda X, XI: X + XI).to_phase_map()
        assert pmap.values.shape == (64, 64)
        assert pmap.grid.x_max == pytest.approx(tiny_grid.L - tiny_grid.h)


class TestProbes:
    def test_lowpass_keeps_band_limited_data(self, small_grid):
        assert lowpass_linf_gain(_gaussian(small_grid), 0.01) == pytest.approx(1.0, abs=1e-12)

    def test_phase_cutoff_keeps_interior_data(self, small_grid):
        assert phase_cutoff_linf_gain(_gaussian(small_grid), 0.01) == pytest.approx(1.0, abs=1e-10)

    def test_kink_has_holder_order_one(self):
        grid = GridSpec1D(L=10.0, N=1024)
        u = SampledField(grid, np.abs(grid.x) * np.exp(-0.5 * grid.x ** 2))
        slope, remainders = holder_remainder_slope(u, [0.25, 0.125, 0.0625, 0.03125, 0.015625])
        assert slope == pytest.approx(1.0, abs=0.15)
        assert remainders == sorted(remainders, reverse=True)

    def test_highpass_vanishes_inside_the_bump(self, small_grid):
        assert highpass_remainder(_gaussian(small_grid), 0.01) == 0.0
        assert highpass_remainder(_gaussian(small_grid), 1.0) > 0.0


def test_resolvable_phase_levels(small_grid):
    assert resolvable_phase_levels(small_grid) == [0, 1, 2]
    assert resolvable_phase_levels(small_grid, 1) == [0, 1]


def _smooth_symbol(grid, rng):
    a, b, c = rng.standard_normal(3)
    w, k = rng.uniform(0.2, 1.5, 2)
    return GridSymbol.from_function(
        grid,
        lambda X, XI: (a + b * np.cos(w * X + c) * np.exp(-(XI / 8.0) ** 2)
                       + 1j * k * XI / (1.0 + XI ** 2) * np.exp(-0.1 * X ** 2)),
    )


@pytest.mark.parametrize("seed", range(10))
def test_quantization_matches_dense_matrix_for_smooth_symbols(small_grid, seed):
    rng = np.random.default_rng(100 + seed)
    p = _smooth_symbol(small_grid, rng)
    u = SampledField(small_grid, (rng.standard_normal(256) + 1j * rng.standard_normal(256))
                     * np.exp(-0.1 * small_grid.x ** 2))
    np.testing.assert_allclose(kn_dense_matrix(p) @ u.values, kn_quantize(p, u).values, atol=1e-10)


@pytest.mark.slow
def test_lp_sum_ratio_is_stable_under_refinement():
    coarse_grid, fine_grid = GridSpec1D(L=8.0, N=1024), GridSpec1D(L=8.0, N=4096)
    for seed in range(20):
        coarse = random_bandlimited(coarse_grid, np.random.default_rng(seed), band=6.0)
        fine = random_bandlimited(fine_grid, np.random.default_rng(seed), band=6.0)
        for s in (0.0, 1.0, 2.0):
            ratio = lp_sum_ratio(coarse, s)
            assert 0.0 < ratio < 100.0
            assert lp_sum_ratio(fine, s) == pytest.approx(ratio, rel=0.2)


def test_lowpass_gain_is_uniform_in_eps():
    grid = GridSpec1D(L=8.0, N=4096)
    kink = SampledField(grid, np.abs(grid.x) * np.exp(-0.5 * grid.x ** 2))
    lacunary = synthesize(SignalSpec.model_validate("lacunary(0.5, 9)"), grid)
    for f in (kink, lacunary):
        gains = [lowpass_linf_gain(f, 2.0 ** -k) for k in range(7)]
        assert max(gains) <= 1.5
    assert lowpass_linf_gain(kink, 2.0 ** -6) == pytest.approx(1.0, abs=0.05)


@pytest.mark.parametrize("r", [0.5, 1.5])
def test_highpass_remainder_decays_at_the_holder_order(r):
    grid = GridSpec1D(L=8.0, N=4096)
    f = synthesize(SignalSpec.model_validate(f"lacunary({r}, 9)"), grid)
    slope, _ = holder_remainder_slope(f, [2.0 ** -k for k in range(7)])
    assert slope >= r - 0.2
