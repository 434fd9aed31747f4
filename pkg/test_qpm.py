"""Tests for dispersion models and quasi-phase-matching."""

import math

import numpy as np
import pytest

from errors import (
    ConfigError,
    DomainError,
    EnergyConservationError,
    FwhmUndefinedError,
    NoFinitePeriodError,
    NoPositivePeriodError,
)
from models.specs import PolingSpec
from optics.dispersion import DispersionModel, available_models, get_model
from optics.qpm import (
    conjugate_wavelength,
    pdc_spectrum,
    phase_mismatch,
    solve_poling_period,
    temperature_tuning,
    wavelength_pairs,
)

NM = 1e-9
PUMP = 657 * NM
SIGNAL = 1314 * NM


def fwhm(model, length, pump, signal, grid, temperature=25.0):
    period = solve_poling_period(model, pump, signal, temperature)
    spec = PolingSpec(period=period, length=length, temperature=temperature)
    return pdc_spectrum(model, spec, pump, grid).fwhm


class TestDispersion:
    def test_registry(self):
        assert available_models() == ["constant", "lithium_niobate", "mgo_lithium_niobate", "toy"]
        with pytest.raises(ConfigError, match="unknown dispersion model"):
            get_model("quartz")

    def test_index_offset(self):
        bulk = get_model("lithium_niobate", index_offset=0.0)
        guided = get_model("lithium_niobate")
        assert guided.index_offset == pytest.approx(0.03)
        assert guided.n(SIGNAL) - bulk.n(SIGNAL) == pytest.approx(0.03)

    def test_lithium_niobate_values(self):
        model = get_model("lithium_niobate", index_offset=0.0)
        assert model.n(PUMP, 100.0) == pytest.approx(2.2015, abs=2e-3)
        assert model.n(SIGNAL, 100.0) == pytest.approx(2.1485, abs=2e-3)
        assert model.n(SIGNAL, 150.0) > model.n(SIGNAL, 25.0)

    def test_array_evaluation(self):
        model = get_model("toy")
        lam = np.array([0.5, 1.0, 2.0]) * 1e-6
        assert model.n(lam) == pytest.approx(2.2 + 0.5 / np.array([0.25, 1.0, 4.0]))

    def test_domain(self):
        with pytest.raises(DomainError):
            get_model("lithium_niobate").n(2500 * NM)


class TestWavelengths:
    def test_degenerate_conjugate(self):
        assert conjugate_wavelength(PUMP, SIGNAL) == pytest.approx(SIGNAL)

    def test_energy_conservation(self):
        with pytest.raises(EnergyConservationError):
            conjugate_wavelength(PUMP, 600 * NM)

    def test_pairs_table(self):
        table = wavelength_pairs(PUMP, [1200 * NM, 1314 * NM, 1400 * NM])
        assert table.shape == (3, 2)
        assert 1 / table[:, 0] + 1 / table[:, 1] == pytest.approx(np.full(3, 1 / PUMP))


class TestPhaseMismatch:
    def test_constant_index_grating_only(self):
        spec = PolingSpec(period=12.1e-6, length=0.01)
        dk = phase_mismatch(get_model("constant"), spec, PUMP, SIGNAL)
        assert dk == pytest.approx(-2 * math.pi / 12.1e-6, rel=1e-9)

    def test_constant_index_needs_no_period(self):
        with pytest.raises(NoFinitePeriodError):
            solve_poling_period(get_model("constant"), PUMP, SIGNAL, 25.0)

    def test_toy_period_closed_form(self):
        model = get_model("toy")
        n_p = 2.2 + 0.5 / 0.657 ** 2
        n_s = 2.2 + 0.5 / 1.314 ** 2
        expected = PUMP / (n_p - n_s)
        assert solve_poling_period(model, PUMP, SIGNAL, 25.0) == pytest.approx(expected, rel=1e-9)

    @pytest.mark.parametrize("name", ["toy", "lithium_niobate", "mgo_lithium_niobate"])
    @pytest.mark.parametrize("signal_nm", [1314, 1200, 1500])
    def test_solved_period_cancels_mismatch(self, name, signal_nm):
        model = get_model(name)
        period = solve_poling_period(model, PUMP, signal_nm * NM, 60.0)
        spec = PolingSpec(period=period, length=0.01, temperature=60.0)
        assert abs(phase_mismatch(model, spec, PUMP, signal_nm * NM)) < 1e-6

    def test_signal_idler_symmetry(self):
        model = get_model("lithium_niobate")
        spec = PolingSpec(period=12e-6, length=0.02, temperature=100.0)
        idler = conjugate_wavelength(PUMP, 1250 * NM)
        a = phase_mismatch(model, spec, PUMP, 1250 * NM)
        b = phase_mismatch(model, spec, PUMP, idler)
        assert a == pytest.approx(b, abs=1e-6)

    def test_normal_dispersion_required(self):
        rising = DispersionModel("rising", lambda lam_um, t: 2.0 + 0.1 * lam_um)
        with pytest.raises(NoPositivePeriodError):
            solve_poling_period(rising, PUMP, SIGNAL, 25.0)

    def test_grating_at_100c(self):
        period = solve_poling_period(get_model("lithium_niobate"), PUMP, SIGNAL, 100.0)
        assert 10e-6 <= period <= 14e-6

    def test_temperature_tuning(self):
        model = get_model("lithium_niobate")
        period = solve_poling_period(model, PUMP, SIGNAL, 100.0)
        spec = PolingSpec(period=period, length=0.032, temperature=100.0)
        dk = temperature_tuning(model, spec, PUMP, SIGNAL, [80.0, 100.0, 120.0])
        assert dk.shape == (3,)
        assert abs(dk[1]) < 1e-6
        assert abs(dk[0]) > 1.0 and abs(dk[2]) > 1.0
        assert np.sign(dk[0]) != np.sign(dk[2])


class TestSpectrum:
    def test_bandwidth_at_32mm(self):
        model = get_model("lithium_niobate")
        period = solve_poling_period(model, PUMP, SIGNAL, 100.0)
        spec = PolingSpec(period=period, length=0.032, temperature=100.0)
        grid = np.arange(1200, 1430.05, 0.1) * NM
        spectrum = pdc_spectrum(model, spec, PUMP, grid)
        assert spectrum.intensity.max() == pytest.approx(1.0)
        assert spectrum.peak_wavelength == pytest.approx(SIGNAL, abs=0.1 * NM)
        assert 25 * NM <= spectrum.fwhm <= 55 * NM

    def test_nondegenerate_width_scales_inversely_with_length(self):
        model = get_model("toy")
        signal = 1200 * NM
        grid = np.arange(1195, 1205.0005, 0.001) * NM
        ratio = fwhm(model, 0.02, PUMP, signal, grid) / fwhm(model, 0.01, PUMP, signal, grid)
        assert 0.4 <= ratio <= 0.6

    def test_degenerate_width_scales_with_inverse_root(self):
        model = get_model("lithium_niobate")
        grid = np.arange(1100, 1550.025, 0.05) * NM
        ratio = fwhm(model, 0.02, PUMP, SIGNAL, grid, 100.0) / fwhm(model, 0.01, PUMP, SIGNAL, grid, 100.0)
        assert ratio == pytest.approx(1 / math.sqrt(2), abs=0.02)

    def test_grid_must_bracket_half_maximum(self):
        model = get_model("lithium_niobate")
        period = solve_poling_period(model, PUMP, SIGNAL, 100.0)
        spec = PolingSpec(period=period, length=0.032, temperature=100.0)
        grid = np.arange(1305, 1320, 0.5) * NM
        with pytest.raises(FwhmUndefinedError) as info:
            pdc_spectrum(model, spec, PUMP, grid)
        assert info.value.spectrum is not None
        assert len(info.value.spectrum.intensity) == len(grid)

    def test_grid_must_increase(self):
        spec = PolingSpec(period=12e-6, length=0.01)
        with pytest.raises(FwhmUndefinedError):
            pdc_spectrum(get_model("toy"), spec, PUMP, [1400 * NM, 1300 * NM])
