"""Tests for conic decay fits, Sobolev growth and flow comparison."""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from phasefront.bargmann import PhaseGrid, PhaseMap, bargmann_transform
from phasefront.errors import BinningMismatch, InsufficientCoverage
from phasefront.field_grid import SignalSpec, synthesize
from phasefront.wavefront import (
    TWO_PI,
    ConicSector,
    WavefrontParams,
    WavefrontReport,
    circular_distance,
    compare_to_flow,
    detect_from_map,
    detect_wavefront,
    directional_decay,
    sobolev_growth,
    sobolev_score,
)


@pytest.fixture(scope="module")
def constant_map(constant_field):
    return bargmann_transform(constant_field, PhaseGrid.square(17.0, 257))


@pytest.fixture(scope="module")
def power_law_map():
    pg = PhaseGrid.square(20.0, 401)
    X, XI = pg.mesh()
    r = np.hypot(X, XI)
    return PhaseMap(pg, np.where(r > 0, 1.0 / np.maximum(r, 1e-12) ** 2, 1.0))


def _report(directions, bins=64):
    return WavefrontReport(angular_bins=[], singular_directions=list(directions),
                           clusters=[], params=WavefrontParams(bins=bins))


class TestSector:
    def test_direction_is_wrapped(self):
        sector = ConicSector(direction=7.0, half_width=0.1, inner_radius=1, outer_radius=2)
        assert sector.direction == pytest.approx(7.0 - TWO_PI)

    @pytest.mark.parametrize("kwargs", [
        {"half_width": math.pi / 4},
        {"half_width": 0.0},
        {"outer_radius": 1.0},
    ])
    def test_rejects_bad_shapes(self, kwargs):
        base = {"direction": 0.0, "half_width": 0.1, "inner_radius": 1.0, "outer_radius": 2.0}
        with pytest.raises(ValidationError):
            ConicSector(**{**base, **kwargs})

    def test_circular_distance(self):
        assert circular_distance(0.1, TWO_PI - 0.1) == pytest.approx(0.2)
        assert circular_distance(0.0, math.pi) == pytest.approx(math.pi)


class TestParams:
    def test_defaults(self):
        params = WavefrontParams()
        assert params.bins == 64
        assert params.half_width == pytest.approx(1.5 * math.pi / 64)
        assert params.probe_radius == pytest.approx(17.0)

    def test_boundary_goes_to_lower_bin(self):
        params = WavefrontParams()
        assert params.bin_index(math.pi / 4) == 7
        assert params.bin_index(0.0) == 0
        assert params.bin_index(-0.01) == 63

    def test_inconsistent_radii(self):
        with pytest.raises(ValidationError):
            WavefrontParams(r0=8.0, r1=4.0)

    def test_schwartz_cutoff_not_below_threshold(self):
        with pytest.raises(ValidationError):
            WavefrontParams(n_max=2.0, n_threshold=3.0)


class TestDirectionalDecay:
    def test_power_law_slope(self, power_law_map):
        sector = ConicSector(direction=1.0, half_width=0.1, inner_radius=4.0, outer_radius=16.0)
        slope, residual = directional_decay(power_law_map, sector)
        assert slope == pytest.approx(-2.0, abs=0.1)
        assert residual < 0.05

    def test_too_few_shells(self, power_law_map):
        sector = ConicSector(direction=1.0, half_width=0.1, inner_radius=4.0, outer_radius=16.0)
        with pytest.raises(InsufficientCoverage):
            directional_decay(power_law_map, sector, shells=6)

    def test_sector_outside_grid(self, power_law_map):
        sector = ConicSector(direction=0.0, half_width=0.1, inner_radius=4.0, outer_radius=25.0)
        with pytest.raises(InsufficientCoverage):
            directional_decay(power_law_map, sector)


class TestSobolev:
    def test_singular_direction_grows(self, constant_map):
        sector = ConicSector(direction=0.0, half_width=0.07, inner_radius=4.0, outer_radius=16.0)
        growth, scores = sobolev_growth(constant_map, sector, 0.5)
        assert len(scores) == 3
        assert growth > 0.2

    def test_regular_direction_saturates(self, constant_map):
        sector = ConicSector(direction=math.pi / 2, half_width=0.07, inner_radius=4.0, outer_radius=16.0)
        growth, _ = sobolev_growth(constant_map, sector, 0.5)
        assert growth < 0.2

    def test_score_is_monotone_in_s(self, constant_map):
        sector = ConicSector(direction=0.0, half_width=0.07, inner_radius=4.0, outer_radius=12.0)
        assert sobolev_score(constant_map, sector, 1.0) > sobolev_score(constant_map, sector, 0.0)

    def test_needs_two_radii(self, constant_map):
        sector = ConicSector(direction=0.0, half_width=0.07, inner_radius=4.0, outer_radius=12.0)
        with pytest.raises(ValueError):
            sobolev_growth(constant_map, sector, 0.5, nested_r1=[12.0])


class TestDetection:
    def test_constant_is_singular_along_x(self, constant_map):
        report = detect_from_map(constant_map)
        assert report.singular_bins() == [0, 1, 2, 29, 30, 31, 32, 33, 34, 61, 62, 63]
        assert len(report.clusters) == 2
        assert min(circular_distance(report.clusters, 0.0)) < 1e-9
        assert min(circular_distance(report.clusters, math.pi)) < 1e-9

    def test_sobolev_flags_match_decay_flags(self, constant_map):
        report = detect_from_map(constant_map, WavefrontParams(s_values=[0.5]))
        assert report.angular_bins[0].sobolev_singular["0.5"]
        assert not report.angular_bins[16].sobolev_singular["0.5"]

    def test_schwartz_only_off_the_axis(self, constant_map):
        bins = detect_from_map(constant_map).angular_bins
        assert bins[16].schwartz and not bins[16].singular
        assert not bins[0].schwartz and bins[0].singular
        assert all(not (b.schwartz and b.singular) for b in bins)

    def test_chirp_is_singular_along_its_slope(self, chirp_field):
        report = detect_wavefront(chirp_field)
        flagged = report.singular_bins()
        assert {7, 8, 39, 40} <= set(flagged)
        centers = WavefrontParams().centers()
        for k in flagged:
            gap = min(circular_distance(centers[k], math.pi / 4), circular_distance(centers[k], 5 * math.pi / 4))
            assert gap < 4 * TWO_PI / 64

    def test_gaussian_is_regular(self, detection_grid):
        u = synthesize(SignalSpec(kind="gaussian", sigma=1.0), detection_grid)
        report = detect_wavefront(u)
        assert report.singular_directions == []
        assert report.clusters == []

    def test_too_few_shells(self, constant_map):
        with pytest.raises(InsufficientCoverage):
            detect_from_map(constant_map, WavefrontParams(shells=4))


class TestCompareToFlow:
    def test_rotation_matches(self):
        flow = lambda theta: theta - math.pi / 4  # noqa: E731
        before = _report([0.1, 3.2])
        after = _report([np.mod(0.1 - math.pi / 4, TWO_PI), 3.2 - math.pi / 4])
        result = compare_to_flow(before, after, flow)
        assert result.passed
        assert all(m.found is not None for m in result.matches)
        assert result.tolerance == pytest.approx(TWO_PI / 64 + 1e-9)

    def test_misses_and_extraneous(self):
        before = _report([0.1, 3.2])
        after = _report([0.1, 1.5])
        result = compare_to_flow(before, after, lambda theta: theta)
        assert not result.passed
        assert result.misses == [3.2]
        assert result.extraneous == [1.5]

    def test_empty_reports_pass(self):
        assert compare_to_flow(_report([]), _report([]), lambda theta: theta).passed

    def test_binning_mismatch(self):
        with pytest.raises(BinningMismatch):
            compare_to_flow(_report([0.1]), _report([0.1], bins=32), lambda theta: theta)


def test_delta_is_singular_along_xi(detection_grid):
    u = synthesize(SignalSpec(kind="delta_approx", sigma=0.05), detection_grid)
    flagged = set(detect_wavefront(u).singular_bins())
    assert {15, 16, 47, 48} <= flagged
    assert not flagged & {0, 31, 32, 63}
