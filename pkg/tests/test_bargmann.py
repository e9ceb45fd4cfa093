"""Tests for the Bargmann transform, its closed forms and map files."""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from phasefront.bargmann import (
    PREFACTOR,
    PhaseGrid,
    PhaseMap,
    bargmann_point,
    bargmann_transform,
    closed_form_magnitude,
    delta_magnitude,
    phase_space_mass,
    read_phase_map_binary,
    write_phase_map_binary,
    write_phase_map_csv,
)
from phasefront.errors import NyquistViolation, UnsupportedKind, WindowOverrun
from phasefront.field_grid import GridSpec1D, SampledField, SignalSpec, synthesize


@pytest.fixture(scope="module")
def grid():
    return GridSpec1D(L=20.0, N=1024)


@pytest.fixture(scope="module")
def phase_grid():
    return PhaseGrid.square(8.0, 33)


class TestPhaseGrid:
    def test_square(self):
        pg = PhaseGrid.square(4.0, 17)
        assert pg.dx == pytest.approx(0.5)
        assert pg.x[0] == -4.0 and pg.xi[-1] == 4.0
        X, XI = pg.mesh()
        assert X.shape == (17, 17)
        assert X[3, 0] == pg.x[3] and XI[0, 5] == pg.xi[5]

    def test_rejects_small_or_reversed(self):
        with pytest.raises(ValidationError):
            PhaseGrid.square(4.0, 8)
        with pytest.raises(ValidationError):
            PhaseGrid(x_min=1, x_max=-1, x_count=16, xi_min=-1, xi_max=1, xi_count=16)

    def test_polar_angles(self):
        pg = PhaseGrid(x_min=-1, x_max=1, x_count=17, xi_min=-1, xi_max=1, xi_count=17)
        radius, angle = PhaseMap(pg, np.zeros((17, 17))).polar()
        assert angle[16, 8] == pytest.approx(0.0)
        assert angle[8, 16] == pytest.approx(math.pi / 2)
        assert angle[8, 0] == pytest.approx(3 * math.pi / 2)
        assert radius[16, 16] == pytest.approx(math.sqrt(2))


class TestClosedForms:
    @pytest.mark.parametrize("shorthand", [
        "constant", "chirp(1)", "chirp(-0.5)", "gaussian(2)", "hermite(3)", "plane_wave(2.5)",
        "delta_approx(0.3)",
    ])
    def test_map_matches_closed_form(self, grid, phase_grid, shorthand):
        spec = SignalSpec.model_validate(shorthand)
        pmap = bargmann_transform(synthesize(spec, grid), phase_grid)
        X, XI = phase_grid.mesh()
        np.testing.assert_allclose(pmap.magnitude(), closed_form_magnitude(spec, (X, XI)), atol=1e-9)

    def test_point_agrees_with_map(self, grid, phase_grid):
        u = synthesize(SignalSpec.model_validate("chirp(0.7)"), grid)
        pmap = bargmann_transform(u, phase_grid)
        for i, j in [(0, 0), (5, 20), (16, 16), (32, 7)]:
            z = (phase_grid.x[i], phase_grid.xi[j])
            assert bargmann_point(u, z) == pytest.approx(pmap.values[i, j], abs=1e-10)

    def test_narrow_gaussian_approaches_delta(self):
        z = (np.array([0.0, 1.0, 2.0]), np.array([0.0, 3.0, -5.0]))
        narrow = closed_form_magnitude(SignalSpec(kind="delta_approx", sigma=1e-5), z)
        np.testing.assert_allclose(narrow, delta_magnitude(z), rtol=1e-8)
        assert delta_magnitude((0.0, 7.0)) == pytest.approx(PREFACTOR)

    def test_unsupported_kind(self):
        with pytest.raises(UnsupportedKind):
            closed_form_magnitude(SignalSpec.model_validate("lacunary(1, 4)"), (0.0, 0.0))

    @pytest.mark.parametrize("shorthand", [
        "constant", "chirp(0.5)", "chirp(1)", "chirp(2)", "gaussian", "hermite(0)", "delta_approx",
    ])
    def test_annulus_matches_closed_form(self, detection_grid, shorthand):
        spec = SignalSpec.model_validate(shorthand)
        pg = PhaseGrid.square(16.0, 129)
        pmap = bargmann_transform(synthesize(spec, detection_grid), pg)
        X, XI = pg.mesh()
        annulus = (np.hypot(X, XI) >= 4.0) & (np.hypot(X, XI) <= 16.0)
        expected = closed_form_magnitude(spec, (X, XI))
        np.testing.assert_allclose(pmap.magnitude()[annulus], expected[annulus], atol=1e-6)


class TestCovariance:
    @staticmethod
    def _packet(y):
        return np.exp(-0.5 * (y - 0.3) ** 2 + 0.7j * y)

    def test_modulation_shifts_xi(self, grid, phase_grid):
        eta = 1.5
        u = SampledField(grid, self._packet(grid.x))
        v = u.replace(np.exp(1j * eta * grid.x) * u.values)
        shifted = phase_grid.model_copy(update={"xi_min": phase_grid.xi_min - eta,
                                                "xi_max": phase_grid.xi_max - eta})
        np.testing.assert_allclose(bargmann_transform(v, phase_grid).magnitude(),
                                   bargmann_transform(u, shifted).magnitude(), atol=1e-8)

    def test_translation_shifts_x(self, grid, phase_grid):
        a = 64 * grid.h
        u = SampledField(grid, self._packet(grid.x))
        v = SampledField(grid, self._packet(grid.x - a))
        shifted = phase_grid.model_copy(update={"x_min": phase_grid.x_min - a,
                                                "x_max": phase_grid.x_max - a})
        np.testing.assert_allclose(bargmann_transform(v, phase_grid).magnitude(),
                                   bargmann_transform(u, shifted).magnitude(), atol=1e-8)


class TestIsometry:
    def test_mass_equals_l2_norm(self, grid):
        u = synthesize(SignalSpec(kind="gaussian", sigma=1.0), grid)
        pmap = bargmann_transform(u, PhaseGrid.square(8.0, 129))
        assert phase_space_mass(pmap) == pytest.approx(u.l2_norm() ** 2, rel=1e-8)


class TestGuards:
    def test_window_overrun(self, grid):
        u = synthesize(SignalSpec(kind="constant"), grid)
        with pytest.raises(WindowOverrun):
            bargmann_transform(u, PhaseGrid.square(15.0, 17))
        with pytest.raises(WindowOverrun):
            bargmann_point(u, (13.0, 0.0))

    def test_band(self, small_grid):
        u = synthesize(SignalSpec(kind="constant"), small_grid)
        pg = PhaseGrid(x_min=-1, x_max=1, x_count=16, xi_min=-50, xi_max=50, xi_count=16)
        with pytest.raises(NyquistViolation):
            bargmann_transform(u, pg)


class TestMapFiles:
    def test_binary_round_trip(self, tmp_path, grid):
        u = synthesize(SignalSpec.model_validate("chirp(1)"), grid)
        pmap = bargmann_transform(u, PhaseGrid.square(4.0, 17))
        path = write_phase_map_binary(pmap, tmp_path / "map.bin")
        assert path.stat().st_size == 56 + 17 * 17 * 16
        back = read_phase_map_binary(path)
        assert back.grid == pmap.grid
        np.testing.assert_array_equal(back.values, pmap.values)

    def test_binary_real_values(self, tmp_path):
        pg = PhaseGrid.square(1.0, 16)
        pmap = PhaseMap(pg, np.arange(256.0).reshape(16, 16))
        back = read_phase_map_binary(write_phase_map_binary(pmap, tmp_path / "real.bin"))
        assert not np.iscomplexobj(back.values)
        np.testing.assert_array_equal(back.values, pmap.values)

    def test_csv_layout(self, tmp_path, grid):
        u = synthesize(SignalSpec(kind="constant"), grid)
        pmap = bargmann_transform(u, PhaseGrid.square(2.0, 16))
        path = write_phase_map_csv(pmap, tmp_path / "map.csv")
        lines = path.read_text().splitlines()
        assert lines[0] == "x,xi,abs,arg"
        assert len(lines) == 1 + 16 * 16
        table = np.loadtxt(path, delimiter=",", skiprows=1)
        np.testing.assert_allclose(table[:, 2], pmap.magnitude().ravel())
